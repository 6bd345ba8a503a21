//! Density operators, unitaries and projectors, together with the basic
//! two-copy functionals: purity, overlap and the swap operator.
//!
//! All three wrapper types validate their defining invariant on
//! construction and are immutable afterwards.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{expm_ihermitian_matrix, herm_eig, kron, ComplexMatrix, STRUCT_TOL};

/// Unit-trace positive Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positive semidefiniteness
    /// (eigenvalues above `-1e-9`).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotDensity {
                reason: format!("matrix is {}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let scale = matrix.frobenius_norm().max(1.0);
        let herm = matrix.hermiticity_residual();
        if herm > STRUCT_TOL * scale {
            return Err(Error::NotDensity {
                reason: format!("not Hermitian (residual {herm:.3e})"),
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STRUCT_TOL || trace.im.abs() > STRUCT_TOL {
            return Err(Error::NotDensity {
                reason: format!("trace {trace} != 1"),
            });
        }
        let (eigenvalues, _) = herm_eig(&matrix)?;
        if let Some(lambda) = eigenvalues.iter().find(|&&l| l < -STRUCT_TOL) {
            return Err(Error::NotDensity {
                reason: format!("negative eigenvalue {lambda:.3e}"),
            });
        }
        Ok(Self { dim: matrix.rows(), matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let matrix = ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64);
        Self { dim, matrix }
    }

    /// Pure state |psi><psi| from an unnormalized amplitude vector.
    pub fn pure_state(amplitudes: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 || !norm_sq.is_finite() {
            return Err(Error::InvalidArgument("zero or non-finite state vector".into()));
        }
        let dim = amplitudes.len();
        let matrix = ComplexMatrix::from_fn(dim, dim, |r, c| {
            amplitudes[r] * amplitudes[c].conj() / norm_sq
        });
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::deserialize(deserializer)?;
        DensityOperator::new(matrix).map_err(serde::de::Error::custom)
    }
}

/// Matrix with U U^dag = I within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.unitarity_residual();
        let scale = (matrix.rows() as f64).sqrt().max(1.0);
        if residual > STRUCT_TOL * scale {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { dim: matrix.rows(), matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Composition `self * other` (apply `other` first).
    pub fn compose(&self, other: &UnitaryOperator) -> UnitaryOperator {
        assert_eq!(self.dim, other.dim);
        UnitaryOperator {
            dim: self.dim,
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    /// U A U^dag.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.mul(a).mul(&self.matrix.dagger())
    }

    /// U^dag A U.
    pub fn conjugate_adjoint(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.dagger().mul(a).mul(&self.matrix)
    }
}

impl Serialize for UnitaryOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitaryOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::deserialize(deserializer)?;
        UnitaryOperator::new(matrix).map_err(serde::de::Error::custom)
    }
}

/// Hermitian idempotent with integer trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    dim: usize,
    rank: usize,
    matrix: ComplexMatrix,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotProjector {
                reason: format!("matrix is {}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let scale = matrix.frobenius_norm().max(1.0);
        if matrix.hermiticity_residual() > STRUCT_TOL * scale {
            return Err(Error::NotProjector { reason: "not Hermitian".into() });
        }
        let idem = matrix.mul(&matrix).sub(&matrix).frobenius_norm();
        if idem > STRUCT_TOL * scale {
            return Err(Error::NotProjector {
                reason: format!("not idempotent (residual {idem:.3e})"),
            });
        }
        let trace = matrix.trace().re;
        let rank = trace.round();
        if (trace - rank).abs() > STRUCT_TOL * scale {
            return Err(Error::NotProjector {
                reason: format!("trace {trace} is not an integer"),
            });
        }
        Ok(Self { dim: matrix.rows(), rank: rank as usize, matrix })
    }

    /// Diagonal projector onto the span of the first `rank` basis vectors.
    pub fn onto_first(dim: usize, rank: usize) -> Result<Self> {
        if rank > dim {
            return Err(Error::InvalidArgument(format!(
                "projector rank {rank} exceeds dimension {dim}"
            )));
        }
        let mut values = vec![0.0; dim];
        values[..rank].fill(1.0);
        Ok(Self { dim, rank, matrix: ComplexMatrix::diag(&values) })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, rank: dim, matrix: ComplexMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl Serialize for Projector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Projector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::deserialize(deserializer)?;
        Projector::new(matrix).map_err(serde::de::Error::custom)
    }
}

/// tr rho^2.
pub fn purity(rho: &DensityOperator) -> f64 {
    // For Hermitian rho, tr rho^2 = sum |rho_ij|^2.
    rho.matrix().entries().iter().map(|z| z.norm_sqr()).sum()
}

/// tr rho sigma.
pub fn overlap(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "overlap",
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    Ok(rho.matrix().trace_product(sigma.matrix()).re)
}

/// The swap operator S |psi> (x) |phi> = |phi> (x) |psi> on H (x) H.
pub fn swap_operator(dim: usize) -> UnitaryOperator {
    let d2 = dim * dim;
    let mut matrix = ComplexMatrix::zeros(d2, d2);
    for a in 0..dim {
        for b in 0..dim {
            matrix.set(a * dim + b, b * dim + a, Complex64::new(1.0, 0.0));
        }
    }
    UnitaryOperator { dim: d2, matrix }
}

/// tr(S rho (x) sigma), evaluated through the literal swap matrix.
///
/// Coincides with [`overlap`]; the two routes cross-check each other.
pub fn functional_via_swap(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            context: "functional_via_swap",
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let s = swap_operator(rho.dim());
    let product = kron(rho.matrix(), sigma.matrix());
    Ok(s.matrix().trace_product(&product).re)
}

/// exp(-i t h) for Hermitian `h`, wrapped as a checked unitary.
pub fn expm_ihermitian(h: &ComplexMatrix, t: f64) -> Result<UnitaryOperator> {
    UnitaryOperator::new(expm_ihermitian_matrix(h, t)?)
}

/// Ginibre-induced random density operator: G G^dag / tr(G G^dag) for a
/// complex Gaussian G. Full rank with probability one, deterministic per seed.
pub fn random_density(dim: usize, seed: u64) -> DensityOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(dim, &mut rng)
}

pub(crate) fn random_density_with(dim: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let gg = g.mul(&g.dagger());
    let trace = gg.trace().re;
    DensityOperator {
        dim,
        matrix: gg.scale_re(1.0 / trace),
    }
}

/// Haar-random pure state, deterministic per seed.
pub fn random_pure(dim: usize, seed: u64) -> DensityOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    DensityOperator::pure_state(&amplitudes).expect("Gaussian vector is nonzero")
}

/// Random Hermitian matrix with Gaussian entries, for tests and sampling.
pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
    .hermitized()
}
