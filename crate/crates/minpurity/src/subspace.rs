//! The swap-conjugation map `Lambda(A) = S A S` and the orthogonal
//! decomposition of Hermitian operator space on H (x) H into its +1 / -1
//! eigenspaces (symmetric and antisymmetric parts), together with
//! product-state span expansions and the membership check they support.
//!
//! The antisymmetric subspace is exactly the set of Hermitian operators
//! invisible to two identical state copies: `tr(A rho (x) rho) = 0` for all
//! states iff `A` is antisymmetric. [`prop2_check`] tests that equivalence
//! both by norm and by sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{herm_eig, kron, ComplexMatrix, STRUCT_TOL};
use crate::state::{random_density_with, swap_operator, DensityOperator};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Eigenvalues below this magnitude count as zero when splitting a
/// Hermitian operator into positive and negative parts.
pub const EIGENVALUE_CUTOFF: f64 = 1e-12;

/// S A S for the swap operator of subsystem dimension `dim`.
pub fn swap_map(a: &ComplexMatrix, dim: usize) -> Result<ComplexMatrix> {
    let d2 = dim * dim;
    if a.rows() != d2 || a.cols() != d2 {
        return Err(Error::DimensionMismatch {
            context: "swap_map",
            left: a.rows(),
            right: d2,
        });
    }
    let s = swap_operator(dim);
    Ok(s.matrix().mul(a).mul(s.matrix()))
}

/// A Hermitian operator on H (x) H split into its symmetric and
/// antisymmetric parts under swap conjugation.
#[derive(Debug, Clone)]
pub struct OperatorSplit {
    pub dim: usize,
    pub matrix: ComplexMatrix,
    pub sym_part: ComplexMatrix,
    pub asym_part: ComplexMatrix,
}

/// sym = (A + SAS)/2, asym = (A - SAS)/2.
pub fn split_sym_asym(a: &ComplexMatrix, dim: usize) -> Result<OperatorSplit> {
    if !a.is_hermitian(STRUCT_TOL) {
        return Err(Error::NotHermitian {
            residual: a.hermiticity_residual(),
        });
    }
    let swapped = swap_map(a, dim)?;
    let sym_part = a.add(&swapped).scale_re(0.5);
    let asym_part = a.sub(&swapped).scale_re(0.5);
    Ok(OperatorSplit {
        dim,
        matrix: a.clone(),
        sym_part,
        asym_part,
    })
}

/// Orthonormal Hermitian basis of operators on H: the generalized
/// Gell-Mann matrices plus I/sqrt(D), normalized in Hilbert-Schmidt norm.
///
/// Order: identity, then for each pair j<k the real and imaginary
/// off-diagonal elements, then the diagonal ladder elements.
pub fn hermitian_basis(dim: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    let inv_sqrt_d = 1.0 / (dim as f64).sqrt();
    basis.push(ComplexMatrix::identity(dim).scale_re(inv_sqrt_d));
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut sym = ComplexMatrix::zeros(dim, dim);
            sym.set(j, k, Complex64::new(inv_sqrt2, 0.0));
            sym.set(k, j, Complex64::new(inv_sqrt2, 0.0));
            basis.push(sym);
            let mut asym = ComplexMatrix::zeros(dim, dim);
            asym.set(j, k, Complex64::new(0.0, -inv_sqrt2));
            asym.set(k, j, Complex64::new(0.0, inv_sqrt2));
            basis.push(asym);
        }
    }
    for l in 1..dim {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut values = vec![0.0; dim];
        values[..l].fill(norm);
        values[l] = -(l as f64) * norm;
        basis.push(ComplexMatrix::diag(&values));
    }
    basis
}

/// Orthonormal bases of the symmetric and antisymmetric subspaces of
/// Hermitian operators on H (x) H.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub dim: usize,
    pub sym_elements: Vec<ComplexMatrix>,
    pub asym_elements: Vec<ComplexMatrix>,
}

/// Builds both subspace bases from the Hermitian basis {X_i}:
/// `{X_i (x) X_i}` and `(X_i (x) X_j +/- X_j (x) X_i)/sqrt(2)` for i<j.
pub fn build_bases(dim: usize) -> SubspaceBasis {
    let xs = hermitian_basis(dim);
    let n = xs.len();
    let mut sym_elements = Vec::with_capacity(n * (n + 1) / 2);
    let mut asym_elements = Vec::with_capacity(n * (n - 1) / 2);
    for x in &xs {
        sym_elements.push(kron(x, x));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let ij = kron(&xs[i], &xs[j]);
            let ji = kron(&xs[j], &xs[i]);
            sym_elements.push(ij.add(&ji).scale_re(inv_sqrt2));
            asym_elements.push(ij.sub(&ji).scale_re(inv_sqrt2));
        }
    }
    SubspaceBasis {
        dim,
        sym_elements,
        asym_elements,
    }
}

/// Positive and negative parts of a Hermitian operator: `a = pos - neg`
/// with both parts positive semidefinite and `pos * neg = 0`.
pub fn pos_neg_parts(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (eigenvalues, vectors) = herm_eig(a)?;
    let n = a.rows();
    let mut pos = ComplexMatrix::zeros(n, n);
    let mut neg = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        if lambda.abs() < EIGENVALUE_CUTOFF {
            continue;
        }
        let target = if lambda > 0.0 { &mut pos } else { &mut neg };
        let weight = lambda.abs();
        for r in 0..n {
            let vr = vectors.get(r, k);
            for c in 0..n {
                let add = vr * vectors.get(c, k).conj() * Complex64::new(weight, 0.0);
                let cur = target.get(r, c);
                target.set(r, c, cur + add);
            }
        }
    }
    Ok((pos, neg))
}

/// One term of a product-state expansion: `coefficient * rho (x) sigma`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductTerm {
    pub rho: DensityOperator,
    pub sigma: DensityOperator,
    pub coefficient: f64,
}

/// One term of a symmetric expansion: `coefficient * rho (x) rho`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetricTerm {
    pub rho: DensityOperator,
    pub coefficient: f64,
}

fn normalized_part(part: ComplexMatrix) -> Option<(DensityOperator, f64)> {
    let trace = part.trace().re;
    if trace <= EIGENVALUE_CUTOFF {
        return None;
    }
    let rho = DensityOperator::new(part.scale_re(1.0 / trace))
        .expect("normalized PSD part is a density operator");
    Some((rho, trace))
}

/// Expands `a (x) b` over products of density operators:
/// `A (x) B = A+ (x) B+ - A- (x) B+ - A+ (x) B- + A- (x) B-`,
/// with every part normalized and its trace absorbed into the coefficient.
pub fn expand_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<ProductTerm>> {
    let (a_pos, a_neg) = pos_neg_parts(a)?;
    let (b_pos, b_neg) = pos_neg_parts(b)?;
    let a_parts = [(a_pos, 1.0), (a_neg, -1.0)];
    let b_parts = [(b_pos, 1.0), (b_neg, -1.0)];
    let mut terms = Vec::new();
    for (a_part, a_sign) in &a_parts {
        let Some((rho, a_trace)) = normalized_part(a_part.clone()) else {
            continue;
        };
        for (b_part, b_sign) in &b_parts {
            let Some((sigma, b_trace)) = normalized_part(b_part.clone()) else {
                continue;
            };
            terms.push(ProductTerm {
                rho: rho.clone(),
                sigma,
                coefficient: a_sign * b_sign * a_trace * b_trace,
            });
        }
    }
    Ok(terms)
}

/// Expands `c (x) c` over identical pairs of density operators:
/// `C (x) C = 2 C+ (x) C+ + 2 C- (x) C- - (C+ + C-) (x) (C+ + C-)`.
pub fn expand_symmetric(c: &ComplexMatrix) -> Result<Vec<SymmetricTerm>> {
    let (pos, neg) = pos_neg_parts(c)?;
    let pos_term = normalized_part(pos.clone());
    let neg_term = normalized_part(neg.clone());
    match (pos_term, neg_term) {
        (None, None) => Ok(Vec::new()),
        // Definite sign: c (x) c is already a single product term.
        (Some((rho, trace)), None) | (None, Some((rho, trace))) => Ok(vec![SymmetricTerm {
            rho,
            coefficient: trace * trace,
        }]),
        (Some((rho_pos, trace_pos)), Some((rho_neg, trace_neg))) => {
            let abs = pos.add(&neg);
            let (rho_abs, trace_abs) =
                normalized_part(abs).expect("sum of nonzero PSD parts has positive trace");
            Ok(vec![
                SymmetricTerm {
                    rho: rho_pos,
                    coefficient: 2.0 * trace_pos * trace_pos,
                },
                SymmetricTerm {
                    rho: rho_neg,
                    coefficient: 2.0 * trace_neg * trace_neg,
                },
                SymmetricTerm {
                    rho: rho_abs,
                    coefficient: -trace_abs * trace_abs,
                },
            ])
        }
    }
}

/// Verdict of [`prop2_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prop2Verdict {
    /// Operator lies in the antisymmetric subspace.
    Antisymmetric,
    /// Operator has a symmetric component.
    HasSymmetricPart,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prop2Report {
    pub dim: usize,
    pub trials: usize,
    /// max over sampled rho of |tr(a rho (x) rho)|
    pub max_abs_trace: f64,
    /// Frobenius norm of the symmetric part of a
    pub sym_norm: f64,
    pub verdict: Prop2Verdict,
    /// true when the sampled criterion and the norm criterion classify
    /// the operator the same way
    pub consistent: bool,
}

/// Tests antisymmetric-subspace membership two ways: exactly, through the
/// norm of the symmetric part, and statistically, through `tr(a rho (x) rho)`
/// over `trials` random full-rank states.
pub fn prop2_check(a: &ComplexMatrix, dim: usize, trials: usize, seed: u64) -> Result<Prop2Report> {
    let split = split_sym_asym(a, dim)?;
    let sym_norm = split.sym_part.frobenius_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs_trace: f64 = 0.0;
    for _ in 0..trials {
        let rho = random_density_with(dim, &mut rng);
        let product = kron(rho.matrix(), rho.matrix());
        max_abs_trace = max_abs_trace.max(a.trace_product(&product).re.abs());
    }
    let tol = 1e-8 * a.frobenius_norm().max(1.0);
    let norm_says_asym = sym_norm < tol;
    let samples_say_asym = max_abs_trace < tol;
    Ok(Prop2Report {
        dim,
        trials,
        max_abs_trace,
        sym_norm,
        verdict: if norm_says_asym {
            Prop2Verdict::Antisymmetric
        } else {
            Prop2Verdict::HasSymmetricPart
        },
        consistent: norm_says_asym == samples_say_asym,
    })
}

/// Summary of the subspace decomposition at one dimension, as emitted by
/// the `subspace` CLI command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceReport {
    pub dim: usize,
    pub sym_dim: usize,
    pub asym_dim: usize,
    /// max |Gram - I| entry over the combined basis
    pub orthogonality_residual: f64,
    pub lemma3_residuals: AntisymmetricResiduals,
    pub seed: u64,
}

/// Worst-case residuals of the antisymmetric-subspace trace identities
/// over random draws: odd-power traces, tr(A^k S) and the anticommutator
/// with S, all of which vanish exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AntisymmetricResiduals {
    pub draws: usize,
    pub max_odd_power_trace: f64,
    pub max_power_swap_trace: f64,
    pub max_anticommutator_norm: f64,
}

/// Draws random antisymmetric operators (normalized to unit Frobenius norm)
/// and records the worst residual of each vanishing identity.
pub fn antisymmetric_residuals(dim: usize, draws: usize, seed: u64) -> AntisymmetricResiduals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = swap_operator(dim);
    let mut max_odd_power_trace: f64 = 0.0;
    let mut max_power_swap_trace: f64 = 0.0;
    let mut max_anticommutator_norm: f64 = 0.0;
    for _ in 0..draws {
        let m = crate::state::random_hermitian(dim * dim, &mut rng);
        let split = split_sym_asym(&m, dim).expect("random Hermitian splits");
        let norm = split.asym_part.frobenius_norm();
        if norm == 0.0 {
            continue;
        }
        let a = split.asym_part.scale_re(1.0 / norm);
        // powers A^1..A^5 cover tr A^{2k-1} for k=1..3 and tr A^k S for k=1..4
        let mut power = a.clone();
        for k in 1..=5usize {
            if k % 2 == 1 {
                max_odd_power_trace = max_odd_power_trace.max(power.trace().re.abs());
            }
            if k <= 4 {
                max_power_swap_trace =
                    max_power_swap_trace.max(power.trace_product(s.matrix()).re.abs());
            }
            if k < 5 {
                power = power.mul(&a);
            }
        }
        let anti = a.mul(s.matrix()).add(&s.matrix().mul(&a));
        max_anticommutator_norm = max_anticommutator_norm.max(anti.frobenius_norm());
    }
    AntisymmetricResiduals {
        draws,
        max_odd_power_trace,
        max_power_swap_trace,
        max_anticommutator_norm,
    }
}

/// max |Gram - I| over the combined sym + asym basis.
pub fn basis_orthogonality_residual(basis: &SubspaceBasis) -> f64 {
    let all: Vec<&ComplexMatrix> = basis
        .sym_elements
        .iter()
        .chain(basis.asym_elements.iter())
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..all.len() {
        for j in i..all.len() {
            let inner = all[i].hs_inner(all[j]);
            let expected = if i == j { 1.0 } else { 0.0 };
            let dev = ((inner.re - expected).powi(2) + inner.im.powi(2)).sqrt();
            worst = worst.max(dev);
        }
    }
    worst
}

/// Full report for one dimension: subspace sizes, basis orthogonality and
/// the antisymmetric trace identities.
pub fn subspace_report(dim: usize, draws: usize, seed: u64) -> SubspaceReport {
    let basis = build_bases(dim);
    SubspaceReport {
        dim,
        sym_dim: basis.sym_elements.len(),
        asym_dim: basis.asym_elements.len(),
        orthogonality_residual: basis_orthogonality_residual(&basis),
        lemma3_residuals: antisymmetric_residuals(dim, draws, seed),
        seed,
    }
}
