//! Lattice and parameter records plus every Hamiltonian matrix the simulator
//! uses: the four effective regimes, the fermionic Kitaev reference, and the
//! full time-dependent rotating-frame generator.
//!
//! Basis convention: sites are interleaved, cavity a_n on site 2n-1 and
//! resonator b_n on site 2n (1-based), so cavities occupy the odd sites.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::special::{bessel_j, SpecialError};

/// Relative Frobenius tolerance for the Hermiticity / symmetry invariants.
pub const MATRIX_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite parameter: {0}")]
    NonFinite(String),
    #[error("Kitaev hopping g_c must be positive, got {0}")]
    NegativeCoupling(f64),
    #[error("chain needs at least {min} modes, got {got}")]
    ChainTooShort { min: usize, got: usize },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Site layout of the interleaved cavity/resonator chain.
///
/// Either the main-text configuration (N+1 cavities, N resonators, odd total)
/// or the appendix configuration (N cavities, N resonators, even total).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    num_cavities: usize,
    num_resonators: usize,
}

impl LatticeSpec {
    pub fn new(num_cavities: usize, num_resonators: usize) -> Result<Self, ModelError> {
        if num_cavities == 0 || num_resonators == 0 {
            return Err(ModelError::InvalidLattice(
                "cavity and resonator counts must be positive".into(),
            ));
        }
        if num_cavities != num_resonators && num_cavities != num_resonators + 1 {
            return Err(ModelError::InvalidLattice(format!(
                "{num_cavities} cavities / {num_resonators} resonators: \
                 need equal counts or one extra cavity"
            )));
        }
        Ok(Self {
            num_cavities,
            num_resonators,
        })
    }

    /// Chain with `total_sites` modes; odd totals use the main-text parity,
    /// even totals the appendix parity.
    pub fn with_total_sites(total_sites: usize) -> Result<Self, ModelError> {
        if total_sites < 2 {
            return Err(ModelError::ChainTooShort {
                min: 2,
                got: total_sites,
            });
        }
        let num_resonators = total_sites / 2;
        Self::new(total_sites - num_resonators, num_resonators)
    }

    pub fn num_cavities(&self) -> usize {
        self.num_cavities
    }

    pub fn num_resonators(&self) -> usize {
        self.num_resonators
    }

    pub fn total_sites(&self) -> usize {
        self.num_cavities + self.num_resonators
    }

    pub fn is_even_parity(&self) -> bool {
        self.num_cavities == self.num_resonators
    }

    /// 0-based site index of cavity a_n (n 0-based).
    pub fn cavity_site(&self, n: usize) -> usize {
        2 * n
    }

    /// 0-based site index of resonator b_n (n 0-based).
    pub fn resonator_site(&self, n: usize) -> usize {
        2 * n + 1
    }

    /// Number of (a_{n+1}, b_n) bonds; the last resonator of an even-parity
    /// chain has no cavity to its right.
    pub fn num_right_bonds(&self) -> usize {
        if self.is_even_parity() {
            self.num_resonators - 1
        } else {
            self.num_resonators
        }
    }

    /// Number of direct cavity-cavity (NNN) bonds.
    pub fn num_cavity_bonds(&self) -> usize {
        self.num_cavities - 1
    }
}

/// Frequency-modulation parameters of the rotating-frame generator, in units
/// of the reference frequency omega_0.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationParams {
    lambda: Vec<f64>,
    gamma: Vec<f64>,
    nu: f64,
    phi: f64,
    omega_b: Vec<f64>,
    delta_a: Vec<f64>,
}

impl ModulationParams {
    pub fn new(
        lambda: Vec<f64>,
        gamma: Vec<f64>,
        nu: f64,
        phi: f64,
        omega_b: Vec<f64>,
        delta_a: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if !(nu > 0.0) {
            return Err(ModelError::NonFinite(format!(
                "modulation frequency nu must be positive, got {nu}"
            )));
        }
        if omega_b.iter().any(|&w| !(w > 0.0)) {
            return Err(ModelError::NonFinite(
                "all resonator frequencies omega_b must be positive".into(),
            ));
        }
        for (name, seq) in [
            ("lambda", &lambda),
            ("gamma", &gamma),
            ("omega_b", &omega_b),
            ("delta_a", &delta_a),
        ] {
            if seq.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite(name.into()));
            }
        }
        if !phi.is_finite() {
            return Err(ModelError::NonFinite("phi".into()));
        }
        Ok(Self {
            lambda,
            gamma,
            nu,
            phi,
            omega_b,
            delta_a,
        })
    }

    /// Uniform values broadcast over the lattice.
    pub fn uniform(
        spec: &LatticeSpec,
        lambda: f64,
        gamma: f64,
        nu: f64,
        phi: f64,
        omega_b: f64,
        delta_a: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            vec![lambda; spec.num_cavities()],
            vec![gamma; spec.num_resonators()],
            nu,
            phi,
            vec![omega_b; spec.num_resonators()],
            vec![delta_a; spec.num_cavities()],
        )
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn omega_b(&self) -> &[f64] {
        &self.omega_b
    }
    pub fn delta_a(&self) -> &[f64] {
        &self.delta_a
    }

    fn check_spec(&self, spec: &LatticeSpec) -> Result<(), ModelError> {
        let checks = [
            ("lambda", self.lambda.len(), spec.num_cavities()),
            ("gamma", self.gamma.len(), spec.num_resonators()),
            ("omega_b", self.omega_b.len(), spec.num_resonators()),
            ("delta_a", self.delta_a.len(), spec.num_cavities()),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(ModelError::DimensionMismatch(format!(
                    "{name} has {got} entries, lattice wants {want}"
                )));
            }
        }
        Ok(())
    }
}

/// Signed effective couplings: G_n between b_n and a_n, G_{n+1} between b_n
/// and a_{n+1}, plus the direct cavity-cavity hopping T.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    g_left: Vec<f64>,
    g_right: Vec<f64>,
    t_cavity: f64,
}

impl CouplingProfile {
    pub fn new(g_left: Vec<f64>, g_right: Vec<f64>, t_cavity: f64) -> Result<Self, ModelError> {
        if g_left.iter().chain(g_right.iter()).any(|v| !v.is_finite()) || !t_cavity.is_finite() {
            return Err(ModelError::NonFinite("coupling profile".into()));
        }
        Ok(Self {
            g_left,
            g_right,
            t_cavity,
        })
    }

    /// Uniform couplings broadcast over the bonds of `spec`.
    pub fn uniform(
        spec: &LatticeSpec,
        g_left: f64,
        g_right: f64,
        t_cavity: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            vec![g_left; spec.num_resonators()],
            vec![g_right; spec.num_right_bonds()],
            t_cavity,
        )
    }

    pub fn g_left(&self) -> &[f64] {
        &self.g_left
    }
    pub fn g_right(&self) -> &[f64] {
        &self.g_right
    }
    pub fn t_cavity(&self) -> f64 {
        self.t_cavity
    }

    fn check_spec(&self, spec: &LatticeSpec) -> Result<(), ModelError> {
        if self.g_left.len() != spec.num_resonators() {
            return Err(ModelError::DimensionMismatch(format!(
                "g_left has {} entries, lattice has {} resonators",
                self.g_left.len(),
                spec.num_resonators()
            )));
        }
        if self.g_right.len() != spec.num_right_bonds() {
            return Err(ModelError::DimensionMismatch(format!(
                "g_right has {} entries, lattice has {} right bonds",
                self.g_right.len(),
                spec.num_right_bonds()
            )));
        }
        Ok(())
    }
}

/// Kappa quadruple per bond for the regime-A builder: (k1, k2) on the
/// (a_n, b_n) bonds, (k3, k4) on the (a_{n+1}, b_n) bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeAKappas {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub k3: Vec<f64>,
    pub k4: Vec<f64>,
}

impl RegimeAKappas {
    pub fn uniform(spec: &LatticeSpec, k1: f64, k2: f64, k3: f64, k4: f64) -> Self {
        Self {
            k1: vec![k1; spec.num_resonators()],
            k2: vec![k2; spec.num_resonators()],
            k3: vec![k3; spec.num_right_bonds()],
            k4: vec![k4; spec.num_right_bonds()],
        }
    }

    fn check_spec(&self, spec: &LatticeSpec) -> Result<(), ModelError> {
        let nr = spec.num_resonators();
        let nright = spec.num_right_bonds();
        if self.k1.len() != nr || self.k2.len() != nr {
            return Err(ModelError::DimensionMismatch(
                "kappa1/kappa2 must have one entry per resonator".into(),
            ));
        }
        if self.k3.len() != nright || self.k4.len() != nright {
            return Err(ModelError::DimensionMismatch(
                "kappa3/kappa4 must have one entry per right bond".into(),
            ));
        }
        if [&self.k1, &self.k2, &self.k3, &self.k4]
            .iter()
            .any(|v| v.iter().any(|x| !x.is_finite()))
        {
            return Err(ModelError::NonFinite("kappa".into()));
        }
        Ok(())
    }
}

/// Kappa pair per bond for the regime-B builder.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeBKappas {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl RegimeBKappas {
    pub fn uniform(spec: &LatticeSpec, k1: f64, k2: f64) -> Self {
        Self {
            k1: vec![k1; spec.num_resonators()],
            k2: vec![k2; spec.num_right_bonds()],
        }
    }

    fn check_spec(&self, spec: &LatticeSpec) -> Result<(), ModelError> {
        if self.k1.len() != spec.num_resonators() || self.k2.len() != spec.num_right_bonds() {
            return Err(ModelError::DimensionMismatch(
                "kappa1 per resonator, kappa2 per right bond".into(),
            ));
        }
        if self
            .k1
            .iter()
            .chain(self.k2.iter())
            .any(|x| !x.is_finite())
        {
            return Err(ModelError::NonFinite("kappa".into()));
        }
        Ok(())
    }
}

/// Quadratic bosonic Hamiltonian in the interleaved basis:
/// H = sum_ij hopping[i][j] a_i^dag a_j
///   + (1/2) sum_ij pairing[i][j] a_i^dag a_j^dag + h.c.
///
/// `hopping` is Hermitian and `pairing` symmetric; a bond amplitude p placed
/// on (i, j) appears as pairing[i][j] = pairing[j][i] = p.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    dim: usize,
    hopping: Array2<Complex64>,
    pairing: Array2<Complex64>,
    basis_note: &'static str,
}

pub const INTERLEAVED_BASIS: &str = "interleaved a_1 b_1 a_2 b_2 ...";

impl QuadraticHamiltonian {
    pub fn new(
        hopping: Array2<Complex64>,
        pairing: Array2<Complex64>,
    ) -> Result<Self, ModelError> {
        let dim = hopping.nrows();
        if hopping.ncols() != dim || pairing.nrows() != dim || pairing.ncols() != dim {
            return Err(ModelError::DimensionMismatch(
                "hopping and pairing must be square matrices of equal size".into(),
            ));
        }
        let qh = Self {
            dim,
            hopping,
            pairing,
            basis_note: INTERLEAVED_BASIS,
        };
        qh.validate()?;
        Ok(qh)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let herm_defect = frob_diff_adjoint(&self.hopping);
        let hop_scale = frob(&self.hopping).max(1.0);
        if herm_defect > MATRIX_SYMMETRY_TOL * hop_scale {
            return Err(ModelError::DimensionMismatch(
                "hopping block is not Hermitian".into(),
            ));
        }
        let sym_defect = frob_diff_transpose(&self.pairing);
        let pair_scale = frob(&self.pairing).max(1.0);
        if sym_defect > MATRIX_SYMMETRY_TOL * pair_scale {
            return Err(ModelError::DimensionMismatch(
                "pairing block is not symmetric".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn hopping(&self) -> &Array2<Complex64> {
        &self.hopping
    }
    pub fn pairing(&self) -> &Array2<Complex64> {
        &self.pairing
    }
    pub fn basis_note(&self) -> &'static str {
        self.basis_note
    }

    pub fn is_pairing_free(&self, tol: f64) -> bool {
        self.pairing.iter().all(|z| z.norm() <= tol)
    }

    /// Quadratic-form matrix M in the doubled basis (modes, then conjugate
    /// modes): M = [[H0, P], [conj(P), conj(H0)]].
    pub fn quadratic_form(&self) -> Array2<Complex64> {
        assemble_quadratic_form(&self.hopping, &self.pairing)
    }

    /// First-moment dynamical matrix Sigma_z * M.
    pub fn dynamical_matrix(&self) -> Array2<Complex64> {
        let mut m = self.quadratic_form();
        negate_lower_rows(&mut m, self.dim);
        m
    }
}

fn frob(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn frob_diff_adjoint(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[[i, j]] - a[[j, i]].conj()).norm_sqr();
        }
    }
    s.sqrt()
}

fn frob_diff_transpose(a: &Array2<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[[i, j]] - a[[j, i]]).norm_sqr();
        }
    }
    s.sqrt()
}

fn assemble_quadratic_form(
    hop: &Array2<Complex64>,
    pair: &Array2<Complex64>,
) -> Array2<Complex64> {
    let m = hop.nrows();
    let mut out = Array2::zeros((2 * m, 2 * m));
    for i in 0..m {
        for j in 0..m {
            out[[i, j]] = hop[[i, j]];
            out[[i, m + j]] = pair[[i, j]];
            out[[m + i, j]] = pair[[i, j]].conj();
            out[[m + i, m + j]] = hop[[i, j]].conj();
        }
    }
    out
}

fn negate_lower_rows(m: &mut Array2<Complex64>, dim: usize) {
    for i in dim..2 * dim {
        for j in 0..2 * dim {
            m[[i, j]] = -m[[i, j]];
        }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

struct Blocks {
    hop: Array2<Complex64>,
    pair: Array2<Complex64>,
}

impl Blocks {
    fn zeros(m: usize) -> Self {
        Self {
            hop: Array2::zeros((m, m)),
            pair: Array2::zeros((m, m)),
        }
    }

    /// Adds amp * a_i^dag a_j + h.c.
    fn add_hop(&mut self, i: usize, j: usize, amp: Complex64) {
        self.hop[[i, j]] += amp;
        self.hop[[j, i]] += amp.conj();
    }

    /// Adds amp * a_i^dag a_j^dag + h.c. (symmetric completion).
    fn add_pair(&mut self, i: usize, j: usize, amp: Complex64) {
        self.pair[[i, j]] += amp;
        self.pair[[j, i]] += amp;
    }
}

/// Effective Hamiltonian at the regime-A resonance (Delta' = omega_b = nu),
/// hopping G_n J0(k1) and G_{n+1} J0(k3); residual Stokes pairing
/// -G_n J_{-2}(k2) and +G_{n+1} J_{-2}(k4) when requested.
pub fn build_regime_a(
    spec: &LatticeSpec,
    couplings: &CouplingProfile,
    kappas: &RegimeAKappas,
    include_residual_stokes: bool,
) -> Result<QuadraticHamiltonian, ModelError> {
    couplings.check_spec(spec)?;
    kappas.check_spec(spec)?;
    let mut b = Blocks::zeros(spec.total_sites());
    for n in 0..spec.num_resonators() {
        let (i, j) = (spec.cavity_site(n), spec.resonator_site(n));
        b.add_hop(i, j, re(couplings.g_left()[n] * bessel_j(0, kappas.k1[n])?));
        if include_residual_stokes {
            b.add_pair(
                i,
                j,
                re(-couplings.g_left()[n] * bessel_j(-2, kappas.k2[n])?),
            );
        }
    }
    for n in 0..spec.num_right_bonds() {
        let (i, j) = (spec.cavity_site(n + 1), spec.resonator_site(n));
        b.add_hop(i, j, re(couplings.g_right()[n] * bessel_j(0, kappas.k3[n])?));
        if include_residual_stokes {
            b.add_pair(
                i,
                j,
                re(couplings.g_right()[n] * bessel_j(-2, kappas.k4[n])?),
            );
        }
    }
    QuadraticHamiltonian::new(b.hop, b.pair)
}

/// Effective Hamiltonian in the strong-coupling regime: bare SSH hopping
/// -G_n / +G_{n+1}, with optional residual Stokes pairing -G_n J_{-2}(k1),
/// +G_{n+1} J_{-2}(k2).
pub fn build_regime_b(
    spec: &LatticeSpec,
    couplings: &CouplingProfile,
    kappas: &RegimeBKappas,
    include_residual_stokes: bool,
) -> Result<QuadraticHamiltonian, ModelError> {
    couplings.check_spec(spec)?;
    kappas.check_spec(spec)?;
    let mut b = Blocks::zeros(spec.total_sites());
    for n in 0..spec.num_resonators() {
        let (i, j) = (spec.cavity_site(n), spec.resonator_site(n));
        b.add_hop(i, j, re(-couplings.g_left()[n]));
        if include_residual_stokes {
            b.add_pair(
                i,
                j,
                re(-couplings.g_left()[n] * bessel_j(-2, kappas.k1[n])?),
            );
        }
    }
    for n in 0..spec.num_right_bonds() {
        let (i, j) = (spec.cavity_site(n + 1), spec.resonator_site(n));
        b.add_hop(i, j, re(couplings.g_right()[n]));
        if include_residual_stokes {
            b.add_pair(
                i,
                j,
                re(couplings.g_right()[n] * bessel_j(-2, kappas.k2[n])?),
            );
        }
    }
    QuadraticHamiltonian::new(b.hop, b.pair)
}

/// Bosonic Kitaev analog: uniform hopping g_c with imaginary pairing
/// i * pairing_left on (a_n, b_n) and i * pairing_right on (a_{n+1}, b_n),
/// the phi = -pi/4 phase choice already folded into the amplitudes.
pub fn build_regime_c_kitaev(
    spec: &LatticeSpec,
    g_c: f64,
    pairing_left: f64,
    pairing_right: f64,
) -> Result<QuadraticHamiltonian, ModelError> {
    if !(g_c > 0.0) {
        return Err(ModelError::NegativeCoupling(g_c));
    }
    if !pairing_left.is_finite() || !pairing_right.is_finite() {
        return Err(ModelError::NonFinite("pairing amplitude".into()));
    }
    let mut b = Blocks::zeros(spec.total_sites());
    for n in 0..spec.num_resonators() {
        let (i, j) = (spec.cavity_site(n), spec.resonator_site(n));
        b.add_hop(i, j, re(g_c));
        b.add_pair(i, j, Complex64::new(0.0, pairing_left));
    }
    for n in 0..spec.num_right_bonds() {
        let (i, j) = (spec.cavity_site(n + 1), spec.resonator_site(n));
        b.add_hop(i, j, re(g_c));
        b.add_pair(i, j, Complex64::new(0.0, pairing_right));
    }
    QuadraticHamiltonian::new(b.hop, b.pair)
}

/// SSH hopping as in regime B plus partial NNN hopping t_eff = T J0(k1) on
/// every cavity-cavity (odd-site) bond; no pairing.
pub fn build_regime_d_nnn(
    spec: &LatticeSpec,
    couplings: &CouplingProfile,
    t_eff: f64,
) -> Result<QuadraticHamiltonian, ModelError> {
    couplings.check_spec(spec)?;
    if !t_eff.is_finite() {
        return Err(ModelError::NonFinite("t_eff".into()));
    }
    let mut b = Blocks::zeros(spec.total_sites());
    for n in 0..spec.num_resonators() {
        b.add_hop(
            spec.cavity_site(n),
            spec.resonator_site(n),
            re(-couplings.g_left()[n]),
        );
    }
    for n in 0..spec.num_right_bonds() {
        b.add_hop(
            spec.cavity_site(n + 1),
            spec.resonator_site(n),
            re(couplings.g_right()[n]),
        );
    }
    for n in 0..spec.num_cavity_bonds() {
        b.add_hop(spec.cavity_site(n + 1), spec.cavity_site(n), re(t_eff));
    }
    QuadraticHamiltonian::new(b.hop, b.pair)
}

/// Particle-hole BdG matrix [[h, D], [D^dag, -h^T]] of the fermionic Kitaev
/// chain at zero chemical potential: h the open-chain hopping matrix
/// (amplitude t_hop), D antisymmetric with `delta` on nearest-neighbor bonds.
/// Real symmetric; eigenvalues come in +-E pairs.
pub fn build_fermionic_kitaev_reference(
    length: usize,
    t_hop: f64,
    delta: f64,
) -> Result<Array2<f64>, ModelError> {
    if length < 2 {
        return Err(ModelError::ChainTooShort {
            min: 2,
            got: length,
        });
    }
    if !t_hop.is_finite() || !delta.is_finite() {
        return Err(ModelError::NonFinite("t_hop / delta".into()));
    }
    let l = length;
    let mut m = Array2::zeros((2 * l, 2 * l));
    for i in 0..l - 1 {
        // h block and -h^T block
        m[[i, i + 1]] = t_hop;
        m[[i + 1, i]] = t_hop;
        m[[l + i, l + i + 1]] = -t_hop;
        m[[l + i + 1, l + i]] = -t_hop;
        // antisymmetric pairing block and its adjoint
        m[[i, l + i + 1]] = delta;
        m[[i + 1, l + i]] = -delta;
        m[[l + i + 1, i]] = delta;
        m[[l + i, i + 1]] = -delta;
    }
    Ok(m)
}

/// Full time-dependent rotating-frame generator: evaluates the quadratic-form
/// matrix M(t) of the linearized Hamiltonian and the first-moment dynamical
/// matrix D(t) = Sigma_z M(t) at any time.
#[derive(Debug, Clone)]
pub struct TimeDependentGenerator {
    spec: LatticeSpec,
    params: ModulationParams,
    couplings: CouplingProfile,
}

impl TimeDependentGenerator {
    pub fn new(
        params: ModulationParams,
        couplings: CouplingProfile,
        spec: LatticeSpec,
    ) -> Result<Self, ModelError> {
        params.check_spec(&spec)?;
        couplings.check_spec(&spec)?;
        Ok(Self {
            spec,
            params,
            couplings,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }
    pub fn params(&self) -> &ModulationParams {
        &self.params
    }
    pub fn couplings(&self) -> &CouplingProfile {
        &self.couplings
    }

    pub fn dim(&self) -> usize {
        self.spec.total_sites()
    }

    /// Instantaneous hopping and pairing blocks of the linearized Hamiltonian.
    fn blocks_at(&self, t: f64) -> Blocks {
        let p = &self.params;
        let s = (p.nu() * t + p.phi()).sin();
        let mut b = Blocks::zeros(self.spec.total_sites());
        let i_unit = Complex64::new(0.0, 1.0);
        for n in 0..self.spec.num_resonators() {
            let (ci, rj) = (self.spec.cavity_site(n), self.spec.resonator_site(n));
            let g = self.couplings.g_left()[n];
            let da = p.delta_a()[n];
            let wb = p.omega_b()[n];
            let (la, ga) = (p.lambda()[n], p.gamma()[n]);
            // anti-Stokes a_n^dag b_n and Stokes a_n^dag b_n^dag phases
            let hop_phase = (i_unit * ((da - wb) * t + (la - ga) * s)).exp();
            let pair_phase = (i_unit * ((da + wb) * t + (la + ga) * s)).exp();
            b.add_hop(ci, rj, -g * hop_phase);
            b.add_pair(ci, rj, -g * pair_phase);
        }
        for n in 0..self.spec.num_right_bonds() {
            let (ci, rj) = (self.spec.cavity_site(n + 1), self.spec.resonator_site(n));
            let g = self.couplings.g_right()[n];
            let da = p.delta_a()[n + 1];
            let wb = p.omega_b()[n];
            let (la, ga) = (p.lambda()[n + 1], p.gamma()[n]);
            let hop_phase = (i_unit * ((da - wb) * t + (la - ga) * s)).exp();
            let pair_phase = (i_unit * ((da + wb) * t + (la + ga) * s)).exp();
            b.add_hop(ci, rj, g * hop_phase);
            b.add_pair(ci, rj, g * pair_phase);
        }
        let t_cav = self.couplings.t_cavity();
        if t_cav != 0.0 {
            for n in 0..self.spec.num_cavity_bonds() {
                let (i, j) = (self.spec.cavity_site(n + 1), self.spec.cavity_site(n));
                let la_diff = p.lambda()[n + 1] - p.lambda()[n];
                b.add_hop(i, j, t_cav * (i_unit * la_diff * s).exp());
            }
        }
        b
    }

    /// Hermitian quadratic-form matrix M(t) in the doubled basis.
    pub fn quadratic_form(&self, t: f64) -> Array2<Complex64> {
        let b = self.blocks_at(t);
        assemble_quadratic_form(&b.hop, &b.pair)
    }

    /// Dynamical matrix D(t) = Sigma_z M(t); dPhi/dt = -i D(t) Phi.
    pub fn dynamical(&self, t: f64) -> Array2<Complex64> {
        let mut m = self.quadratic_form(t);
        negate_lower_rows(&mut m, self.dim());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{bessel_zero, BesselZeroRequest};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs(a: &Array2<Complex64>) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn lattice_parity_rules() {
        assert!(LatticeSpec::new(3, 2).is_ok());
        assert!(LatticeSpec::new(2, 2).is_ok());
        assert!(LatticeSpec::new(4, 2).is_err());
        assert!(LatticeSpec::new(2, 3).is_err());
        assert!(LatticeSpec::new(0, 0).is_err());

        let odd = LatticeSpec::with_total_sites(101).unwrap();
        assert_eq!(odd.num_cavities(), 51);
        assert_eq!(odd.num_right_bonds(), 50);
        let even = LatticeSpec::with_total_sites(100).unwrap();
        assert_eq!(even.num_cavities(), 50);
        assert_eq!(even.num_right_bonds(), 49);
    }

    #[test]
    fn interleaved_ordering() {
        let spec = LatticeSpec::new(3, 2).unwrap();
        assert_eq!(spec.cavity_site(0), 0);
        assert_eq!(spec.resonator_site(0), 1);
        assert_eq!(spec.cavity_site(2), 4);
    }

    #[test]
    fn regime_a_three_site_hand_assembly() {
        // 2 cavities / 1 resonator, G1 = -0.3, G2 = 0.3, J0 values (0.5, 0.8)
        let spec = LatticeSpec::new(2, 1).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.3, 0.3, 0.0).unwrap();
        // pick kappas whose J0 equal 0.5 and 0.8 by inverting numerically
        let k1 = invert_j0(0.5);
        let k3 = invert_j0(0.8);
        let kappas = RegimeAKappas::uniform(&spec, k1, 0.0, k3, 0.0);
        let qh = build_regime_a(&spec, &couplings, &kappas, false).unwrap();
        assert_eq!(qh.dim(), 3);
        assert!((qh.hopping()[[0, 1]] - c(-0.15, 0.0)).norm() < 1e-12);
        assert!((qh.hopping()[[1, 2]] - c(0.24, 0.0)).norm() < 1e-12);
        assert_eq!(qh.hopping()[[0, 2]], c(0.0, 0.0));
        assert_eq!(qh.hopping()[[0, 0]], c(0.0, 0.0));
        assert!(qh.is_pairing_free(0.0));
    }

    fn invert_j0(target: f64) -> f64 {
        // J0 decreases monotonically from 1 on [0, j_{0,1}]
        let (mut lo, mut hi) = (0.0, 2.4);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if bessel_j(0, mid).unwrap() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn regime_a_bessel_zero_kills_pairing() {
        let spec = LatticeSpec::new(3, 2).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.4, 0.4, 0.0).unwrap();
        let z = bessel_zero(BesselZeroRequest { order: 2, index: 1 }).unwrap();
        let kappas = RegimeAKappas::uniform(&spec, 1.0, z, 2.0, z);
        let qh = build_regime_a(&spec, &couplings, &kappas, true).unwrap();
        assert!(max_abs(qh.pairing()) < 1e-10);
    }

    /// Oracle: roots of x^4 - (2 v^2 + w^2) x^2 + v^4 for the open 4-site
    /// chain with bonds (v, w, v).
    fn four_site_oracle(v: f64, w: f64) -> Vec<f64> {
        let b = 2.0 * v * v + w * w;
        let disc = (b * b - 4.0 * v.powi(4)).sqrt();
        let x2_hi = 0.5 * (b + disc);
        let x2_lo = 0.5 * (b - disc);
        let mut out = vec![
            -x2_hi.sqrt(),
            -x2_lo.sqrt(),
            x2_lo.sqrt(),
            x2_hi.sqrt(),
        ];
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    #[test]
    fn regime_a_four_site_spectrum_matches_polynomial_oracle() {
        // -G_n = G_{n+1}, J0(k1) = J0(k3): bonds (|G| J0, |G| J0, |G| J0)
        let spec = LatticeSpec::new(2, 2).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -1.0, 1.0, 0.0).unwrap();
        let kappas = RegimeAKappas::uniform(&spec, 1.3, 0.0, 1.3, 0.0);
        let qh = build_regime_a(&spec, &couplings, &kappas, false).unwrap();
        let j0 = bessel_j(0, 1.3).unwrap();
        let want = four_site_oracle(j0.abs(), j0.abs());
        let got = crate::spectral::eig_hermitian(qh.hopping()).unwrap();
        for (g, w) in got.eigenvalues.iter().zip(&want) {
            assert!((g.re - w).abs() < 1e-10, "got {} want {}", g.re, w);
        }
    }

    #[test]
    fn regime_b_hand_assembly_and_zero_couplings() {
        let spec = LatticeSpec::with_total_sites(100).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.25, 0.5, 0.0).unwrap();
        let kappas = RegimeBKappas::uniform(&spec, 0.0, 0.0);
        let qh = build_regime_b(&spec, &couplings, &kappas, false).unwrap();
        // weak/strong bonds 0.25/0.5
        assert!((qh.hopping()[[0, 1]] - c(0.25, 0.0)).norm() < 1e-15);
        assert!((qh.hopping()[[1, 2]] - c(0.5, 0.0)).norm() < 1e-15);

        let zero = CouplingProfile::uniform(&spec, 0.0, 0.0, 0.0).unwrap();
        let qz = build_regime_b(&spec, &zero, &kappas, false).unwrap();
        assert_eq!(max_abs(qz.hopping()), 0.0);
        assert_eq!(max_abs(qz.pairing()), 0.0);
    }

    #[test]
    fn regime_b_residual_at_bessel_zero_is_noop() {
        let spec = LatticeSpec::new(3, 2).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.25, 0.5, 0.0).unwrap();
        let z = bessel_zero(BesselZeroRequest { order: 2, index: 1 }).unwrap();
        let kz = RegimeBKappas::uniform(&spec, z, z);
        let on = build_regime_b(&spec, &couplings, &kz, true).unwrap();
        let off = build_regime_b(&spec, &couplings, &kz, false).unwrap();
        let mut diff: f64 = 0.0;
        for (a, b) in on.pairing().iter().zip(off.pairing().iter()) {
            diff = diff.max((a - b).norm());
        }
        assert!(diff < 1e-10);
    }

    #[test]
    fn regime_c_two_mode_hand_assembly() {
        let spec = LatticeSpec::new(1, 1).unwrap();
        let qh = build_regime_c_kitaev(&spec, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(qh.hopping()[[0, 1]], c(1.0, 0.0));
        assert_eq!(qh.hopping()[[1, 0]], c(1.0, 0.0));
        assert_eq!(qh.pairing()[[0, 1]], c(0.0, 0.5));
        assert_eq!(qh.pairing()[[1, 0]], c(0.0, 0.5));
        assert_eq!(qh.pairing()[[0, 0]], c(0.0, 0.0));
    }

    #[test]
    fn regime_c_zero_pairing_reduces_to_hopping_chain() {
        let spec = LatticeSpec::with_total_sites(10).unwrap();
        let qh = build_regime_c_kitaev(&spec, 0.5, 0.0, 0.0).unwrap();
        assert!(qh.is_pairing_free(0.0));
        assert!(build_regime_c_kitaev(&spec, -0.5, 0.1, 0.1).is_err());
    }

    #[test]
    fn regime_d_hand_assembly() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.25, 0.5, 0.0).unwrap();
        let qh = build_regime_d_nnn(&spec, &couplings, 0.1).unwrap();
        assert_eq!(qh.hopping()[[0, 1]], c(0.25, 0.0));
        assert_eq!(qh.hopping()[[1, 2]], c(0.5, 0.0));
        assert_eq!(qh.hopping()[[0, 2]], c(0.1, 0.0));
    }

    #[test]
    fn regime_d_zero_nnn_equals_regime_b() {
        let spec = LatticeSpec::with_total_sites(20).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.25, 0.5, 0.0).unwrap();
        let kappas = RegimeBKappas::uniform(&spec, 0.0, 0.0);
        let d = build_regime_d_nnn(&spec, &couplings, 0.0).unwrap();
        let b = build_regime_b(&spec, &couplings, &kappas, false).unwrap();
        for (x, y) in d.hopping().iter().zip(b.hopping().iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn appendix_parity_is_truncation_of_main_text() {
        let n = 7;
        let even = LatticeSpec::new(n, n).unwrap();
        let odd = LatticeSpec::new(n + 1, n).unwrap();
        let ce = CouplingProfile::uniform(&even, -0.25, 0.5, 0.0).unwrap();
        let co = CouplingProfile::uniform(&odd, -0.25, 0.5, 0.0).unwrap();
        let ke = RegimeBKappas::uniform(&even, 0.0, 0.0);
        let ko = RegimeBKappas::uniform(&odd, 0.0, 0.0);
        let he = build_regime_b(&even, &ce, &ke, false).unwrap();
        let ho = build_regime_b(&odd, &co, &ko, false).unwrap();
        let m = even.total_sites();
        for i in 0..m {
            for j in 0..m {
                assert_eq!(he.hopping()[[i, j]], ho.hopping()[[i, j]]);
            }
        }
    }

    #[test]
    fn kitaev_reference_shape_and_symmetry() {
        let m = build_fermionic_kitaev_reference(4, 0.5, 0.2).unwrap();
        assert_eq!(m.nrows(), 8);
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(m[[i, j]], m[[j, i]]);
            }
        }
        assert!(build_fermionic_kitaev_reference(1, 0.5, 0.2).is_err());
    }

    #[test]
    fn generator_static_limit() {
        // all lambda = gamma = 0, Delta' = omega_b, T = 0: anti-Stokes blocks
        // static, pairing oscillating at e^{+-2 i omega_b t}
        let spec = LatticeSpec::new(2, 1).unwrap();
        let wb = 3.0;
        let params = ModulationParams::uniform(&spec, 0.0, 0.0, 1.0, 0.0, wb, wb).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.25, 0.5, 0.0).unwrap();
        let gen = TimeDependentGenerator::new(params, couplings, spec).unwrap();
        let t = 0.37;
        let m = gen.quadratic_form(t);
        // hopping entry static
        assert!((m[[0, 1]] - c(0.25, 0.0)).norm() < 1e-12);
        // pairing entry rotates at 2 omega_b
        let g = -0.25;
        let pair = -g * Complex64::new(0.0, 2.0 * wb * t).exp();
        assert!((m[[0, 4]] - pair).norm() < 1e-12);
    }

    #[test]
    fn generator_at_time_zero_phi_zero() {
        let spec = LatticeSpec::new(2, 1).unwrap();
        let params = ModulationParams::uniform(&spec, 1.2, 0.7, 2.0, 0.0, 2.0, 2.0).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.25, 0.5, 0.3).unwrap();
        let gen = TimeDependentGenerator::new(params, couplings, spec).unwrap();
        let m = gen.quadratic_form(0.0);
        // all Jacobi phases are 1: entries are the raw coupling amplitudes
        assert!((m[[0, 1]] - c(0.25, 0.0)).norm() < 1e-14);
        assert!((m[[2, 1]] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((m[[2, 0]] - c(0.3, 0.0)).norm() < 1e-14);
        assert!((m[[0, 4]] - c(0.25, 0.0)).norm() < 1e-14);
        assert!((m[[2, 4]] - c(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn generator_hermitian_at_all_times() {
        let spec = LatticeSpec::new(3, 2).unwrap();
        let params = ModulationParams::uniform(&spec, 2.5, 2.5, 10.0, -0.25, 10.0, 10.0).unwrap();
        let couplings = CouplingProfile::uniform(&spec, -0.25, 0.5, 0.2).unwrap();
        let gen = TimeDependentGenerator::new(params, couplings, spec).unwrap();
        for i in 0..20 {
            let t = 0.137 * i as f64;
            let m = gen.quadratic_form(t);
            assert!(frob_diff_adjoint(&m) < 1e-12 * frob(&m).max(1.0));
        }
    }

    #[test]
    fn generator_period_average_matches_resonant_selection() {
        // Regime-A resonance: the one-period average of M(t) must reproduce
        // the resonant-term selection (J0 on hopping, J_{-2} on pairing) with
        // the signs of the rotating-frame Hamiltonian: -G_n J0(k1) hopping,
        // -G_n J_{-2}(k2) pairing, +G_{n+1} on the right bonds.
        let spec = LatticeSpec::new(2, 1).unwrap();
        let nu = 7.0;
        let (la, ga) = (2.0, 0.5);
        let params =
            ModulationParams::uniform(&spec, la, ga, nu, 0.0, nu, nu).unwrap();
        let (gl, gr) = (-0.3, 0.45);
        let couplings = CouplingProfile::uniform(&spec, gl, gr, 0.0).unwrap();
        let gen = TimeDependentGenerator::new(params, couplings, spec).unwrap();

        let period = 2.0 * std::f64::consts::PI / nu;
        let nodes = 20_000usize;
        let mut avg: Array2<Complex64> = Array2::zeros((6, 6));
        // composite trapezoid over one period
        for k in 0..=nodes {
            let w = if k == 0 || k == nodes { 0.5 } else { 1.0 };
            let m = gen.quadratic_form(period * k as f64 / nodes as f64);
            avg = avg + m * Complex64::new(w, 0.0);
        }
        avg = avg / Complex64::new(nodes as f64, 0.0);

        let j0_1 = bessel_j(0, la - ga).unwrap();
        let j0_3 = bessel_j(0, la - ga).unwrap();
        let jm2_2 = bessel_j(-2, la + ga).unwrap();
        let jm2_4 = bessel_j(-2, la + ga).unwrap();
        // hopping entries
        assert!((avg[[0, 1]] - c(-gl * j0_1, 0.0)).norm() < 1e-6);
        assert!((avg[[2, 1]] - c(gr * j0_3, 0.0)).norm() < 1e-6);
        // pairing entries
        assert!((avg[[0, 4]] - c(-gl * jm2_2, 0.0)).norm() < 1e-6);
        assert!((avg[[2, 4]] - c(gr * jm2_4, 0.0)).norm() < 1e-6);
    }
}
