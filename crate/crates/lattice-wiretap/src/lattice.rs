//! General lattice representation with exact (brute-force) and Babai
//! quantization plus the two figures of merit: volume-to-noise ratio and
//! normalized second moment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::linalg::{determinant, invert, LinalgError, Matrix, Vector};

/// Exact CVP refuses dimensions above this; the enumeration is exponential
/// on purpose.
pub const DEFAULT_CVP_DIM_CAP: usize = 10;
/// Guard on the number of points one exact search may visit.
pub const CVP_ENUMERATION_CAP: u128 = 100_000_000;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("exact CVP is capped at dimension {cap}, lattice has dimension {dim}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("search box of {points} points exceeds the enumeration cap {cap}")]
    SearchTooLarge { points: u128, cap: u128 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("noise variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("search radius must be at least 1, got {0}")]
    BadSearchRadius(i64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Full-rank real lattice `{ basis * x : x integer }`.
#[derive(Debug, Clone)]
pub struct Lattice {
    basis: Matrix,
    basis_inv: Matrix,
    dim: usize,
    volume: f64,
}

/// Outcome of quantizing a target to a lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizeResult {
    /// The chosen lattice point.
    pub point: Vector,
    /// Its integer coordinates in the lattice basis.
    pub coords: Vec<i64>,
    /// Euclidean distance from the target to the point.
    pub dist: f64,
}

/// Figures of merit of a lattice at a reference noise variance.
#[derive(Debug, Clone)]
pub struct MeritReport {
    /// Covolume |det(basis)|.
    pub volume: f64,
    /// Monte Carlo estimate of the normalized second moment.
    pub nsm_estimate: f64,
    /// Standard error of the estimate.
    pub nsm_stderr: f64,
    /// Volume-to-noise ratio at `noise_var`.
    pub vnr: f64,
    /// Noise variance the VNR refers to (1.0 unless stated otherwise).
    pub noise_var: f64,
}

impl Lattice {
    /// Wraps a square full-rank basis; the inverse is cached for quantizers.
    pub fn new(basis: Matrix) -> Result<Self, LatticeError> {
        if !basis.is_square() {
            return Err(LinalgError::NotSquare { rows: basis.rows(), cols: basis.cols() }.into());
        }
        let dim = basis.rows();
        if dim == 0 {
            return Err(LatticeError::DimensionMismatch("empty basis".into()));
        }
        let basis_inv = invert(&basis)?;
        let volume = determinant(&basis)?.abs();
        Ok(Self { basis, basis_inv, dim, volume })
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(Matrix::identity(dim)).expect("identity basis is full rank")
    }

    /// The classic 2-d hexagonal lattice.
    pub fn hexagonal() -> Self {
        Self::new(Matrix::from_rows(&[&[1.0, 0.5], &[0.0, 3.0_f64.sqrt() / 2.0]]))
            .expect("hexagonal basis is full rank")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_inv(&self) -> &Matrix {
        &self.basis_inv
    }

    /// Covolume |det(basis)|.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// The lattice point with the given integer coordinates.
    pub fn point_at(&self, coords: &[i64]) -> Result<Vector, LatticeError> {
        if coords.len() != self.dim {
            return Err(LatticeError::DimensionMismatch(format!(
                "{} coordinates for a {}-dimensional lattice",
                coords.len(),
                self.dim
            )));
        }
        let as_f64 = Vector::from_fn(self.dim, |i| coords[i] as f64);
        Ok(self.basis.mul_vec(&as_f64)?)
    }

    /// Radius that guarantees the exact search box contains the closest
    /// point: ceil of the basis infinity-norm condition number, plus one.
    pub fn default_search_radius(&self) -> i64 {
        (self.basis.norm_inf() * self.basis_inv.norm_inf()).ceil() as i64 + 1
    }

    /// Babai rounding: nearest integer coordinates in the given basis.
    pub fn babai_round(&self, target: &Vector) -> Result<QuantizeResult, LatticeError> {
        let coords_real = self.basis_inv.mul_vec(target)?;
        let coords: Vec<i64> = coords_real.as_slice().iter().map(|x| x.round() as i64).collect();
        let point = self.point_at(&coords)?;
        let dist = target.sub(&point).norm();
        Ok(QuantizeResult { point, coords, dist })
    }

    /// Exact closest point by enumerating every coordinate vector within
    /// `search_radius` of the Babai rounding, breaking distance ties toward
    /// the lexicographically smallest coordinates.
    pub fn cvp_exact(
        &self,
        target: &Vector,
        search_radius: i64,
    ) -> Result<QuantizeResult, LatticeError> {
        if self.dim > DEFAULT_CVP_DIM_CAP {
            return Err(LatticeError::DimensionCap { dim: self.dim, cap: DEFAULT_CVP_DIM_CAP });
        }
        if search_radius < 1 {
            return Err(LatticeError::BadSearchRadius(search_radius));
        }
        if target.len() != self.dim {
            return Err(LatticeError::DimensionMismatch(format!(
                "target length {} for a {}-dimensional lattice",
                target.len(),
                self.dim
            )));
        }
        let side = 2 * search_radius as u128 + 1;
        let points = side.pow(self.dim as u32);
        if points > CVP_ENUMERATION_CAP {
            return Err(LatticeError::SearchTooLarge { points, cap: CVP_ENUMERATION_CAP });
        }

        let center: Vec<i64> = self
            .basis_inv
            .mul_vec(target)?
            .as_slice()
            .iter()
            .map(|x| x.round() as i64)
            .collect();

        let mut offset = vec![-search_radius; self.dim];
        let mut coords = vec![0i64; self.dim];
        let mut best_coords: Option<Vec<i64>> = None;
        let mut best_dist_sq = f64::INFINITY;
        loop {
            for i in 0..self.dim {
                coords[i] = center[i] + offset[i];
            }
            let mut dist_sq = 0.0;
            for row in 0..self.dim {
                let mut p = 0.0;
                for (col, &c) in coords.iter().enumerate() {
                    p += self.basis.get(row, col) * c as f64;
                }
                let d = target.get(row) - p;
                dist_sq += d * d;
            }
            let better = dist_sq < best_dist_sq
                || (dist_sq == best_dist_sq
                    && best_coords.as_ref().is_some_and(|b| coords < *b));
            if better {
                best_dist_sq = dist_sq;
                best_coords = Some(coords.clone());
            }
            // Advance the odometer over the search box.
            let mut i = 0;
            loop {
                if i == self.dim {
                    let coords = best_coords.expect("box contains at least one point");
                    let point = self.point_at(&coords)?;
                    let dist = target.sub(&point).norm();
                    return Ok(QuantizeResult { point, coords, dist });
                }
                offset[i] += 1;
                if offset[i] <= search_radius {
                    break;
                }
                offset[i] = -search_radius;
                i += 1;
            }
        }
    }

    /// Shortest nonzero lattice vector by exhaustive search, subject to the
    /// same dimension cap as exact CVP.
    pub fn shortest_vector(&self) -> Result<(Vector, f64), LatticeError> {
        if self.dim > DEFAULT_CVP_DIM_CAP {
            return Err(LatticeError::DimensionCap { dim: self.dim, cap: DEFAULT_CVP_DIM_CAP });
        }
        // Coordinates of the shortest vector are bounded through any known
        // lattice vector, e.g. the shortest basis column.
        let min_col = (0..self.dim)
            .map(|j| self.basis.column(j).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = (self.basis_inv.norm_inf() * min_col).ceil() as i64 + 1;
        let side = 2 * radius as u128 + 1;
        let points = side.pow(self.dim as u32);
        if points > CVP_ENUMERATION_CAP {
            return Err(LatticeError::SearchTooLarge { points, cap: CVP_ENUMERATION_CAP });
        }
        let mut offset = vec![-radius; self.dim];
        let mut best: Option<(Vec<i64>, f64)> = None;
        loop {
            if offset.iter().any(|&c| c != 0) {
                let point = self.point_at(&offset)?;
                let norm = point.norm();
                if best.as_ref().map_or(true, |(_, b)| norm < *b) {
                    best = Some((offset.clone(), norm));
                }
            }
            let mut i = 0;
            loop {
                if i == self.dim {
                    let (coords, norm) = best.expect("box contains a nonzero point");
                    return Ok((self.point_at(&coords)?, norm));
                }
                offset[i] += 1;
                if offset[i] <= radius {
                    break;
                }
                offset[i] = -radius;
                i += 1;
            }
        }
    }

    /// Monte Carlo estimate of the normalized second moment: quantization
    /// error of points drawn uniformly over the basis parallelepiped (a
    /// fundamental domain), normalized by dimension and covolume.
    pub fn estimate_nsm(&self, samples: u64, seed: u64) -> Result<MeritReport, LatticeError> {
        if self.dim > DEFAULT_CVP_DIM_CAP {
            return Err(LatticeError::DimensionCap { dim: self.dim, cap: DEFAULT_CVP_DIM_CAP });
        }
        assert!(samples > 0, "estimate_nsm needs at least one sample");
        let radius = self.default_search_radius();
        let vol_term = self.volume.powf(2.0 / self.dim as f64);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let u = Vector::from_fn(self.dim, |_| rng.random_range(0.0..1.0));
            let t = self.basis.mul_vec(&u)?;
            let q = self.cvp_exact(&t, radius)?;
            let stat = q.dist * q.dist / (self.dim as f64 * vol_term);
            sum += stat;
            sum_sq += stat * stat;
        }
        let nf = samples as f64;
        let mean = sum / nf;
        let var = (sum_sq / nf - mean * mean).max(0.0);
        let stderr = (var / nf).sqrt();
        Ok(MeritReport {
            volume: self.volume,
            nsm_estimate: mean,
            nsm_stderr: stderr,
            vnr: self.compute_vnr(1.0)?,
            noise_var: 1.0,
        })
    }

    /// Volume-to-noise ratio `V^(2/n) / (2 pi e sigma^2)`.
    pub fn compute_vnr(&self, noise_var: f64) -> Result<f64, LatticeError> {
        if noise_var <= 0.0 {
            return Err(LatticeError::NonPositiveVariance(noise_var));
        }
        let vol_term = self.volume.powf(2.0 / self.dim as f64);
        Ok(vol_term / (2.0 * std::f64::consts::PI * std::f64::consts::E * noise_var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RngStream;

    #[test]
    fn point_at_identity_and_skewed_basis() {
        let z2 = Lattice::standard(2);
        assert_eq!(z2.point_at(&[2, -1]).unwrap().as_slice(), &[2.0, -1.0]);

        // Columns (1, 0.5) and (0, 1).
        let skew = Lattice::new(Matrix::from_rows(&[&[1.0, 0.0], &[0.5, 1.0]])).unwrap();
        let p = skew.point_at(&[1, 1]).unwrap();
        assert!((p.get(0) - 1.0).abs() < 1e-15);
        assert!((p.get(1) - 1.5).abs() < 1e-15);

        assert_eq!(skew.point_at(&[0, 0]).unwrap().as_slice(), &[0.0, 0.0]);
        assert!(skew.point_at(&[1]).is_err());
    }

    #[test]
    fn lattice_rejects_singular_basis() {
        let b = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(Lattice::new(b).is_err());
    }

    #[test]
    fn cvp_on_integer_lattice_rounds_per_coordinate() {
        let z2 = Lattice::standard(2);
        let q = z2.cvp_exact(&Vector::from_slice(&[0.3, 0.6]), 2).unwrap();
        assert_eq!(q.coords, vec![0, 1]);
        assert!((q.dist - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cvp_of_lattice_point_is_exact() {
        let hex = Lattice::hexagonal();
        let target = hex.point_at(&[3, -2]).unwrap();
        let q = hex.cvp_exact(&target, hex.default_search_radius()).unwrap();
        assert_eq!(q.coords, vec![3, -2]);
        assert!(q.dist < 1e-12);
    }

    #[test]
    fn cvp_breaks_ties_lexicographically() {
        let z2 = Lattice::standard(2);
        let q = z2.cvp_exact(&Vector::from_slice(&[0.5, 0.5]), 1).unwrap();
        assert_eq!(q.coords, vec![0, 0]);
    }

    #[test]
    fn cvp_respects_dimension_cap() {
        let lat = Lattice::standard(DEFAULT_CVP_DIM_CAP + 1);
        let t = Vector::zeros(DEFAULT_CVP_DIM_CAP + 1);
        assert!(matches!(lat.cvp_exact(&t, 1), Err(LatticeError::DimensionCap { .. })));
    }

    #[test]
    fn babai_equals_exact_on_orthogonal_basis() {
        let z3 = Lattice::standard(3);
        let mut rng = RngStream::new(40, 0).rng();
        for _ in 0..200 {
            let t = Vector::from_fn(3, |_| rng.random_range(-4.0..4.0));
            let b = z3.babai_round(&t).unwrap();
            let e = z3.cvp_exact(&t, 2).unwrap();
            assert_eq!(b.coords, e.coords);
        }
    }

    #[test]
    fn babai_recovers_point_within_rounding_cell() {
        let lat = Lattice::new(Matrix::diagonal(&[2.0, 3.0])).unwrap();
        let point = lat.point_at(&[4, -1]).unwrap();
        // Shift by 0.49 of the shortest basis column (length 2).
        let shifted = point.add(&Vector::from_slice(&[0.49 * 2.0, 0.0]));
        let q = lat.babai_round(&shifted).unwrap();
        assert_eq!(q.coords, vec![4, -1]);
    }

    #[test]
    fn exact_never_beats_babai_on_hexagonal_lattice() {
        let hex = Lattice::hexagonal();
        let radius = hex.default_search_radius();
        let mut rng = RngStream::new(41, 0).rng();
        let mut strict = 0usize;
        for _ in 0..1000 {
            let t = Vector::from_fn(2, |_| rng.random_range(-5.0..5.0));
            let b = hex.babai_round(&t).unwrap();
            let e = hex.cvp_exact(&t, radius).unwrap();
            assert!(e.dist <= b.dist + 1e-12);
            if e.dist < b.dist - 1e-9 {
                strict += 1;
            }
        }
        assert!(strict > 0, "Babai was never strictly beaten");
    }

    #[test]
    fn cvp_is_translation_equivariant() {
        let hex = Lattice::hexagonal();
        let radius = hex.default_search_radius();
        let mut rng = RngStream::new(42, 0).rng();
        for _ in 0..200 {
            let t = Vector::from_fn(2, |_| rng.random_range(-2.0..2.0));
            let shift = hex.point_at(&[rng.random_range(-3..3), rng.random_range(-3..3)]).unwrap();
            let e1 = hex.cvp_exact(&t, radius).unwrap();
            let e2 = hex.cvp_exact(&t.add(&shift), radius).unwrap();
            assert!((e1.dist - e2.dist).abs() < 1e-9);
        }
    }

    #[test]
    fn shortest_vector_closed_forms() {
        let (v, norm) = Lattice::standard(3).shortest_vector().unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);

        // Hexagonal lattice at unit covolume scaling: shortest vector has
        // the basis column length 1.
        let (_, hex_norm) = Lattice::hexagonal().shortest_vector().unwrap();
        assert!((hex_norm - 1.0).abs() < 1e-12);

        let (_, scaled) = Lattice::new(Matrix::diagonal(&[3.0, 0.25])).unwrap()
            .shortest_vector()
            .unwrap();
        assert!((scaled - 0.25).abs() < 1e-12);
    }

    #[test]
    fn nsm_of_integer_lattices_matches_uniform_moment() {
        for dim in 1..=4usize {
            let lat = Lattice::standard(dim);
            let report = lat.estimate_nsm(40_000, 7 + dim as u64).unwrap();
            let err = (report.nsm_estimate - 1.0 / 12.0).abs();
            assert!(
                err <= 3.0 * report.nsm_stderr,
                "dim {dim}: estimate {} stderr {}",
                report.nsm_estimate,
                report.nsm_stderr
            );
            assert!((report.volume - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nsm_is_scale_invariant() {
        let hex = Lattice::hexagonal();
        let scaled = Lattice::new(hex.basis().scale(3.0)).unwrap();
        let a = hex.estimate_nsm(30_000, 12).unwrap();
        let b = scaled.estimate_nsm(30_000, 13).unwrap();
        let combined = (a.nsm_stderr.powi(2) + b.nsm_stderr.powi(2)).sqrt();
        assert!((a.nsm_estimate - b.nsm_estimate).abs() <= 3.0 * combined);
    }

    #[test]
    fn vnr_closed_forms() {
        let z3 = Lattice::standard(3);
        let sigma_sq = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);
        assert!((z3.compute_vnr(sigma_sq).unwrap() - 1.0).abs() < 1e-12);

        // Scaling the basis by c multiplies the VNR by c^2.
        let scaled = Lattice::new(Matrix::identity(3).scale(2.0)).unwrap();
        let base = z3.compute_vnr(0.5).unwrap();
        assert!((scaled.compute_vnr(0.5).unwrap() - 4.0 * base).abs() < 1e-12);

        // Doubling the variance halves the VNR.
        assert!((z3.compute_vnr(1.0).unwrap() - base / 2.0).abs() < 1e-12);

        assert!(matches!(z3.compute_vnr(0.0), Err(LatticeError::NonPositiveVariance(_))));
    }
}
