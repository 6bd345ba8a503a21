//! Gate-level synthesis of the measurement schemes.
//!
//! Both constructions conjugate the swap operator into a local measurement
//! operator:
//!
//! - odd dimension D = 2N+1: a unitary built from two commuting gate
//!   families takes S to `2 P (x) I - I (x) I` with P of rank N+1, so a
//!   yes-no measurement on the first copy alone reads the purity off as
//!   `P(rho) = 2 Pr - 1`;
//! - even dimension D = 2N: three commuting families take S to
//!   `I (x) I - 2 P (x) Q` with ranks (N, 2N-1), a local two-body
//!   measurement with readout `P(rho) = 1 - 2 Pr`.
//!
//! Gates are written directly as identity-plus-2x2-block rotations; the
//! qutrit and qubit fixtures rebuild the same unitaries from their literal
//! Hermitian generators through the matrix exponential as a cross-check.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{kron, ComplexMatrix};
use crate::state::{expm_ihermitian, swap_operator, Projector, UnitaryOperator};

/// Which of the two constructions a scheme came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeVariant {
    /// Odd D: single-system measurement, readout (a,b) = (2,-1).
    #[serde(rename = "odd-minimal")]
    OddMinimal,
    /// Even D: local two-body measurement, readout (a,b) = (-2,1).
    #[serde(rename = "even-two-body")]
    EvenTwoBody,
}

impl std::fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeVariant::OddMinimal => write!(f, "odd-minimal"),
            SchemeVariant::EvenTwoBody => write!(f, "even-two-body"),
        }
    }
}

/// A complete measurement scheme: interaction unitary on H (x) H, local
/// measurement projectors, and the affine readout coefficients.
///
/// Fields are public so that deliberately broken schemes can be assembled
/// in tests; [`MeasurementScheme::validate`] checks the full invariant set
/// and returns the conjugation residual.
#[derive(Debug, Clone)]
pub struct MeasurementScheme {
    pub dim: usize,
    pub variant: SchemeVariant,
    pub unitary: UnitaryOperator,
    pub proj_first: Projector,
    pub proj_second: Projector,
    pub recover_a: f64,
    pub recover_b: f64,
}

impl MeasurementScheme {
    /// The measured effect P (x) Q.
    pub fn measurement_operator(&self) -> ComplexMatrix {
        kron(self.proj_first.matrix(), self.proj_second.matrix())
    }

    /// The operator the construction must conjugate S into.
    pub fn conjugation_target(&self) -> ComplexMatrix {
        let d2 = self.dim * self.dim;
        let id = ComplexMatrix::identity(d2);
        let pq = self.measurement_operator().scale_re(2.0);
        match self.variant {
            SchemeVariant::OddMinimal => pq.sub(&id),
            SchemeVariant::EvenTwoBody => id.sub(&pq),
        }
    }

    /// Checks structural invariants (dimensions, ranks, readout
    /// coefficients) and returns the conjugation residual; succeeds iff
    /// the residual is below `tol`.
    pub fn validate(&self, tol: f64) -> Result<f64> {
        let d = self.dim;
        if self.unitary.dim() != d * d {
            return Err(Error::DimensionMismatch {
                context: "scheme unitary",
                left: self.unitary.dim(),
                right: d * d,
            });
        }
        if self.proj_first.dim() != d || self.proj_second.dim() != d {
            return Err(Error::DimensionMismatch {
                context: "scheme projectors",
                left: self.proj_first.dim(),
                right: d,
            });
        }
        let (want_first, want_second, want_a, want_b) = match self.variant {
            SchemeVariant::OddMinimal => {
                if d % 2 == 0 {
                    return Err(Error::OddDimRequired { dim: d });
                }
                ((d + 1) / 2, d, 2.0, -1.0)
            }
            SchemeVariant::EvenTwoBody => {
                if d % 2 == 1 {
                    return Err(Error::EvenDimRequired { dim: d });
                }
                (d / 2, d - 1, -2.0, 1.0)
            }
        };
        if self.proj_first.rank() != want_first || self.proj_second.rank() != want_second {
            return Err(Error::InvalidArgument(format!(
                "projector ranks ({}, {}) do not match variant {} at dimension {d}",
                self.proj_first.rank(),
                self.proj_second.rank(),
                self.variant
            )));
        }
        if self.recover_a != want_a || self.recover_b != want_b {
            return Err(Error::InvalidArgument(format!(
                "readout coefficients ({}, {}) do not match variant {}",
                self.recover_a, self.recover_b, self.variant
            )));
        }
        let residual = verify_scheme(self);
        if residual >= tol {
            return Err(Error::Numerical(format!(
                "conjugation residual {residual:.3e} exceeds tolerance {tol:.3e}"
            )));
        }
        Ok(residual)
    }
}

/// || U S U^dag - target ||_F for the scheme's variant target.
pub fn verify_scheme(scheme: &MeasurementScheme) -> f64 {
    let s = swap_operator(scheme.dim);
    let conjugated = scheme.unitary.conjugate(s.matrix());
    conjugated.sub(&scheme.conjugation_target()).frobenius_norm()
}

/// Rank-(N+1) diagonal projector onto span{|0>..|N>} for odd D = 2N+1.
pub fn projector_odd(dim: usize) -> Result<Projector> {
    if dim % 2 == 0 {
        return Err(Error::OddDimRequired { dim });
    }
    Projector::onto_first(dim, (dim + 1) / 2)
}

/// Identity except a 2x2 block on basis indices (a, b) of H (x) H.
fn two_level_gate(
    d2: usize,
    a: usize,
    b: usize,
    block: [[f64; 2]; 2],
) -> UnitaryOperator {
    let mut m = ComplexMatrix::identity(d2);
    m.set(a, a, Complex64::new(block[0][0], 0.0));
    m.set(a, b, Complex64::new(block[0][1], 0.0));
    m.set(b, a, Complex64::new(block[1][0], 0.0));
    m.set(b, b, Complex64::new(block[1][1], 0.0));
    UnitaryOperator::new(m).expect("two-level block is unitary by construction")
}

fn check_pair(i: usize, j: usize, limit: usize) -> Result<()> {
    if i >= j || j > limit {
        return Err(Error::IndexOutOfRange {
            what: format!("pair (i, j) = ({i}, {j}) needs i < j <= {limit}"),
        });
    }
    Ok(())
}

/// Beam-splitter gate on span{|i,j>, |j,i>}:
/// `|i,j> -> (|i,j> - |j,i>)/sqrt(2)`, `|j,i> -> (|i,j> + |j,i>)/sqrt(2)`.
pub fn gate_u(i: usize, j: usize, dim: usize) -> Result<UnitaryOperator> {
    check_pair(i, j, dim.saturating_sub(1))?;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    Ok(two_level_gate(
        dim * dim,
        i * dim + j,
        j * dim + i,
        [[c, c], [-c, c]],
    ))
}

/// Adjoint of [`gate_u`]:
/// `|i,j> -> (|i,j> + |j,i>)/sqrt(2)`, `|j,i> -> (-|i,j> + |j,i>)/sqrt(2)`.
pub fn gate_r(i: usize, j: usize, dim: usize) -> Result<UnitaryOperator> {
    check_pair(i, j, dim.saturating_sub(1))?;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    Ok(two_level_gate(
        dim * dim,
        i * dim + j,
        j * dim + i,
        [[c, -c], [c, c]],
    ))
}

/// Signed transposition `|j,i> -> |2N+1-j, 2N+1-j+i>` (and back with a
/// minus sign) for odd D = 2N+1, defined for 0 <= i < j <= N.
pub fn gate_v(i: usize, j: usize, dim: usize) -> Result<UnitaryOperator> {
    if dim % 2 == 0 {
        return Err(Error::OddDimRequired { dim });
    }
    let n = (dim - 1) / 2;
    check_pair(i, j, n)?;
    let row = dim - j; // 2N+1-j
    let col = dim - j + i;
    let a = j * dim + i;
    let b = row * dim + col;
    Ok(two_level_gate(dim * dim, a, b, [[0.0, -1.0], [1.0, 0.0]]))
}

/// Signed transposition `|j,i> -> -|N+i, N+j>` for even D = 2N, defined
/// for 0 <= i < j <= N-1.
pub fn gate_t(i: usize, j: usize, dim: usize) -> Result<UnitaryOperator> {
    if dim % 2 == 1 {
        return Err(Error::EvenDimRequired { dim });
    }
    let n = dim / 2;
    check_pair(i, j, n.saturating_sub(1))?;
    let a = j * dim + i;
    let b = (n + i) * dim + (n + j);
    Ok(two_level_gate(dim * dim, a, b, [[0.0, 1.0], [-1.0, 0.0]]))
}

/// Signed transposition `|i,i> -> -|i, 2N-1>` for even D = 2N, defined
/// for 0 <= i <= N-1.
pub fn gate_w(i: usize, dim: usize) -> Result<UnitaryOperator> {
    if dim % 2 == 1 {
        return Err(Error::EvenDimRequired { dim });
    }
    let n = dim / 2;
    if i >= n {
        return Err(Error::IndexOutOfRange {
            what: format!("index i = {i} needs i <= {}", n - 1),
        });
    }
    let a = i * dim + i;
    let b = i * dim + (dim - 1);
    Ok(two_level_gate(dim * dim, a, b, [[0.0, 1.0], [-1.0, 0.0]]))
}

fn product(gates: impl IntoIterator<Item = UnitaryOperator>, d2: usize) -> UnitaryOperator {
    let mut acc = UnitaryOperator::identity(d2);
    for gate in gates {
        acc = gate.compose(&acc); // later gates act after earlier ones
    }
    acc
}

/// Minimal scheme for odd D: U = (product of V gates) (product of U gates),
/// measurement `P (x) I` with rank (D+1)/2, readout (2, -1).
pub fn build_odd_scheme(dim: usize) -> Result<MeasurementScheme> {
    if dim % 2 == 0 {
        return Err(Error::OddDimRequired { dim });
    }
    if dim < 3 {
        return Err(Error::InvalidArgument(format!(
            "minimal scheme needs dimension >= 3, got {dim}"
        )));
    }
    let d2 = dim * dim;
    let n = (dim - 1) / 2;
    let mut gates = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            gates.push(gate_u(i, j, dim)?);
        }
    }
    for i in 0..n {
        for j in (i + 1)..=n {
            gates.push(gate_v(i, j, dim)?);
        }
    }
    let scheme = MeasurementScheme {
        dim,
        variant: SchemeVariant::OddMinimal,
        unitary: product(gates, d2),
        proj_first: projector_odd(dim)?,
        proj_second: Projector::identity(dim),
        recover_a: 2.0,
        recover_b: -1.0,
    };
    scheme.validate(1e-9)?;
    Ok(scheme)
}

/// Two-body scheme for even D: U = (T product)(W product)(R product),
/// measurement `P (x) Q` with ranks (D/2, D-1), readout (-2, 1).
pub fn build_even_scheme(dim: usize) -> Result<MeasurementScheme> {
    if dim % 2 == 1 {
        return Err(Error::EvenDimRequired { dim });
    }
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "two-body scheme needs dimension >= 2, got {dim}"
        )));
    }
    let d2 = dim * dim;
    let n = dim / 2;
    let mut gates = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            gates.push(gate_r(i, j, dim)?);
        }
    }
    for i in 0..n {
        gates.push(gate_w(i, dim)?);
    }
    for i in 0..n.saturating_sub(1) {
        for j in (i + 1)..n {
            gates.push(gate_t(i, j, dim)?);
        }
    }
    let scheme = MeasurementScheme {
        dim,
        variant: SchemeVariant::EvenTwoBody,
        unitary: product(gates, d2),
        proj_first: Projector::onto_first(dim, n)?,
        proj_second: Projector::onto_first(dim, dim - 1)?,
        recover_a: -2.0,
        recover_b: 1.0,
    };
    scheme.validate(1e-9)?;
    Ok(scheme)
}

fn generator(dim: usize, out: (usize, usize, usize, usize), inp: (usize, usize, usize, usize)) -> ComplexMatrix {
    // i |out><inp| - i |inp><out| on H (x) H, from single-system matrix units
    let plus = kron(
        &ComplexMatrix::matrix_unit(dim, out.0, out.1),
        &ComplexMatrix::matrix_unit(dim, out.2, out.3),
    );
    let minus = kron(
        &ComplexMatrix::matrix_unit(dim, inp.0, inp.1),
        &ComplexMatrix::matrix_unit(dim, inp.2, inp.3),
    );
    plus.scale(Complex64::new(0.0, 1.0))
        .add(&minus.scale(Complex64::new(0.0, -1.0)))
}

/// The explicit qutrit (D = 3) scheme, rebuilt from its four literal 9x9
/// Hermitian generators through the matrix exponential:
/// `U = e^{-i pi/2 H4} e^{-i pi/4 H3} e^{-i pi/4 H2} e^{-i pi/4 H1}`.
pub fn qutrit_fixture() -> MeasurementScheme {
    use std::f64::consts::FRAC_PI_2;
    use std::f64::consts::FRAC_PI_4;
    // H1 = i E01 (x) E10 - i E10 (x) E01, and cyclically for (0,2), (1,2);
    // H4 couples |1,0> with |2,2>.
    let h1 = generator(3, (0, 1, 1, 0), (1, 0, 0, 1));
    let h2 = generator(3, (0, 2, 2, 0), (2, 0, 0, 2));
    let h3 = generator(3, (1, 2, 2, 1), (2, 1, 1, 2));
    let h4 = generator(3, (2, 1, 2, 0), (1, 2, 0, 2));
    let e1 = expm_ihermitian(&h1, FRAC_PI_4).expect("Hermitian generator");
    let e2 = expm_ihermitian(&h2, FRAC_PI_4).expect("Hermitian generator");
    let e3 = expm_ihermitian(&h3, FRAC_PI_4).expect("Hermitian generator");
    let e4 = expm_ihermitian(&h4, FRAC_PI_2).expect("Hermitian generator");
    let unitary = e4.compose(&e3).compose(&e2).compose(&e1);
    MeasurementScheme {
        dim: 3,
        variant: SchemeVariant::OddMinimal,
        unitary,
        proj_first: projector_odd(3).expect("3 is odd"),
        proj_second: Projector::identity(3),
        recover_a: 2.0,
        recover_b: -1.0,
    }
}

/// The explicit qubit (D = 2) two-body scheme from its literal 4x4
/// generators: `U = e^{-i pi/2 H2} e^{-i pi/4 H1}`.
pub fn qubit_fixture() -> MeasurementScheme {
    use std::f64::consts::FRAC_PI_2;
    use std::f64::consts::FRAC_PI_4;
    let h1 = generator(2, (1, 0, 0, 1), (0, 1, 1, 0));
    let h2 = generator(2, (0, 0, 0, 1), (0, 0, 1, 0));
    let e1 = expm_ihermitian(&h1, FRAC_PI_4).expect("Hermitian generator");
    let e2 = expm_ihermitian(&h2, FRAC_PI_2).expect("Hermitian generator");
    MeasurementScheme {
        dim: 2,
        variant: SchemeVariant::EvenTwoBody,
        unitary: e2.compose(&e1),
        proj_first: Projector::onto_first(2, 1).expect("rank fits"),
        proj_second: Projector::onto_first(2, 1).expect("rank fits"),
        recover_a: -2.0,
        recover_b: 1.0,
    }
}

#[derive(Serialize, Deserialize)]
struct SchemeSchema {
    dim: usize,
    variant: SchemeVariant,
    unitary: UnitaryOperator,
    proj_first: Projector,
    proj_second: Projector,
    recover_a: f64,
    recover_b: f64,
    residual: f64,
}

impl Serialize for MeasurementScheme {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SchemeSchema {
            dim: self.dim,
            variant: self.variant,
            unitary: self.unitary.clone(),
            proj_first: self.proj_first.clone(),
            proj_second: self.proj_second.clone(),
            recover_a: self.recover_a,
            recover_b: self.recover_b,
            residual: verify_scheme(self),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeasurementScheme {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let schema = SchemeSchema::deserialize(deserializer)?;
        let scheme = MeasurementScheme {
            dim: schema.dim,
            variant: schema.variant,
            unitary: schema.unitary,
            proj_first: schema.proj_first,
            proj_second: schema.proj_second,
            recover_a: schema.recover_a,
            recover_b: schema.recover_b,
        };
        // Shape consistency only; the conjugation residual is re-checked by
        // explicit verification, not at parse time.
        if scheme.unitary.dim() != scheme.dim * scheme.dim
            || scheme.proj_first.dim() != scheme.dim
            || scheme.proj_second.dim() != scheme.dim
        {
            return Err(serde::de::Error::custom(
                "scheme dimensions are inconsistent",
            ));
        }
        Ok(scheme)
    }
}
