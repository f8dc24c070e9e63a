//! Integer-order Bessel functions of the first kind, their zeros, and the
//! translation of modulation strengths into the Bessel arguments used by the
//! effective-Hamiltonian builders.

use thiserror::Error;

use crate::model::{LatticeSpec, ModulationParams, RegimeAKappas, RegimeBKappas};

/// Largest supported |order| for [`bessel_j`].
pub const MAX_ORDER: i32 = 64;

#[derive(Debug, Error)]
pub enum SpecialError {
    #[error("Bessel order {0} outside supported range |m| <= {MAX_ORDER}")]
    OrderOutOfRange(i32),
    #[error("Bessel argument must be finite")]
    NonFiniteArgument,
    #[error("zero index must be >= 1")]
    ZeroIndexOutOfRange,
    #[error("failed to bracket zero {index} of J_{order}")]
    BracketingFailure { order: i32, index: usize },
    #[error("modulation sequences do not match the lattice: {0}")]
    LengthMismatch(String),
}

/// Request for the `index`-th positive zero of `J_order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BesselZeroRequest {
    pub order: i32,
    pub index: usize,
}

/// J_m(x) for integer m, accurate to better than 1e-12 absolute for |x| <= 100.
///
/// Evaluated by Miller's backward recurrence normalized with
/// J_0 + 2 sum_k J_{2k} = 1; the power series takes over near the origin
/// where the recurrence ratios blow up.
pub fn bessel_j(order: i32, x: f64) -> Result<f64, SpecialError> {
    if order.abs() > MAX_ORDER {
        return Err(SpecialError::OrderOutOfRange(order));
    }
    if !x.is_finite() {
        return Err(SpecialError::NonFiniteArgument);
    }
    // Reduce to m >= 0, x >= 0 via J_{-m}(x) = (-1)^m J_m(x) and
    // J_m(-x) = (-1)^m J_m(x).
    let mut sign = 1.0;
    let m = if order < 0 {
        if order % 2 != 0 {
            sign = -sign;
        }
        -order
    } else {
        order
    } as usize;
    let xa = if x < 0.0 {
        if m % 2 == 1 {
            sign = -sign;
        }
        -x
    } else {
        x
    };
    if xa == 0.0 {
        return Ok(if m == 0 { sign } else { 0.0 });
    }
    if xa < 1e-3 {
        return Ok(sign * series_j(m, xa));
    }
    Ok(sign * miller_j(m, xa))
}

/// Ascending power series; only used for small arguments where a handful of
/// terms reaches machine precision.
fn series_j(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading term (x/2)^m / m!
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / k as f64;
    }
    let mut sum = term;
    let x2 = half * half;
    for k in 1..40 {
        term *= -x2 / (k as f64 * (m + k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn miller_j(m: usize, x: f64) -> f64 {
    // Starting order high enough that the downward recurrence has converged
    // onto the minimal solution by the time it reaches m.
    let start = {
        let guess = xa_start(x).max(m as f64 + 40.0);
        let mut s = guess.ceil() as usize;
        if s % 2 == 1 {
            s += 1;
        }
        s
    };
    let mut jp = 0.0_f64; // J_{k+1}
    let mut jc = 1e-300_f64; // J_k
    let mut norm = 0.0_f64; // J_0 + 2 sum J_{2k}
    let mut result = 0.0_f64;
    let mut k = start;
    loop {
        let jm = (2.0 * (k + 1) as f64 / x) * jc - jp; // J_k from J_{k+1}, J_{k+2}
        jp = jc;
        jc = jm;
        if k % 2 == 0 {
            norm += if k == 0 { jc } else { 2.0 * jc };
        }
        if k == m {
            result = jc;
        }
        if k == 0 {
            break;
        }
        k -= 1;
        // rescale to dodge overflow
        if jc.abs() > 1e250 {
            jp /= 1e250;
            jc /= 1e250;
            norm /= 1e250;
            result /= 1e250;
        }
    }
    result / norm
}

fn xa_start(x: f64) -> f64 {
    x + 15.0 * (x + 1.0).cbrt() + 50.0
}

/// The `index`-th positive zero of J_m, to |J_m| < 1e-10.
///
/// Zeros of J_{-m} coincide with those of J_m, so the order sign is ignored.
pub fn bessel_zero(req: BesselZeroRequest) -> Result<f64, SpecialError> {
    if req.index < 1 {
        return Err(SpecialError::ZeroIndexOutOfRange);
    }
    let m = req.order.abs();
    if m > MAX_ORDER {
        return Err(SpecialError::OrderOutOfRange(req.order));
    }
    // Scan for sign changes; consecutive zeros are at least ~pi apart so a
    // 0.25 step cannot skip one.
    let step = 0.25;
    let mut x = if m == 0 { step } else { m as f64 };
    let mut f_prev = bessel_j(m, x)?;
    let mut found = 0usize;
    let limit = m as f64 + 4.0 * (req.index as f64 + 2.0) + m as f64;
    while x < m as f64 + limit + 1000.0 {
        let x_next = x + step;
        let f_next = bessel_j(m, x_next)?;
        if f_prev == 0.0 {
            // landed exactly on a zero
            found += 1;
            if found == req.index {
                return Ok(x);
            }
        } else if f_prev * f_next < 0.0 {
            found += 1;
            if found == req.index {
                return bisect_zero(m, x, x_next);
            }
        }
        x = x_next;
        f_prev = f_next;
    }
    Err(SpecialError::BracketingFailure {
        order: req.order,
        index: req.index,
    })
}

fn bisect_zero(m: i32, mut lo: f64, mut hi: f64) -> Result<f64, SpecialError> {
    let mut f_lo = bessel_j(m, lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = bessel_j(m, mid)?;
        if f_mid == 0.0 || hi - lo < 1e-14 {
            return Ok(mid);
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which effective-Hamiltonian derivation the kappa arguments feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KappaRegime {
    A,
    B,
}

/// Kappa arguments for the regime-A builder from the raw modulation strengths:
/// (lambda_n - gamma_n, lambda_n + gamma_n, lambda_{n+1} - gamma_n,
/// lambda_{n+1} + gamma_n) per resonator.
pub fn kappas_regime_a(
    spec: &LatticeSpec,
    params: &ModulationParams,
) -> Result<RegimeAKappas, SpecialError> {
    check_lengths(spec, params)?;
    let nr = spec.num_resonators();
    let nright = spec.num_right_bonds();
    let lambda = params.lambda();
    let gamma = params.gamma();
    let mut k = RegimeAKappas {
        k1: Vec::with_capacity(nr),
        k2: Vec::with_capacity(nr),
        k3: Vec::with_capacity(nright),
        k4: Vec::with_capacity(nright),
    };
    for n in 0..nr {
        k.k1.push(lambda[n] - gamma[n]);
        k.k2.push(lambda[n] + gamma[n]);
    }
    for n in 0..nright {
        k.k3.push(lambda[n + 1] - gamma[n]);
        k.k4.push(lambda[n + 1] + gamma[n]);
    }
    Ok(k)
}

/// Kappa arguments for the regime-B builder: (2 lambda_n,
/// lambda_{n+1} + lambda_n) per resonator, valid under
/// lambda_{n+1} = lambda_n = gamma_n.
pub fn kappas_regime_b(
    spec: &LatticeSpec,
    params: &ModulationParams,
) -> Result<RegimeBKappas, SpecialError> {
    check_lengths(spec, params)?;
    let lambda = params.lambda();
    let k1 = (0..spec.num_resonators())
        .map(|n| 2.0 * lambda[n])
        .collect();
    let k2 = (0..spec.num_right_bonds())
        .map(|n| lambda[n + 1] + lambda[n])
        .collect();
    Ok(RegimeBKappas { k1, k2 })
}

/// Dispatching wrapper over the two kappa translations.
pub fn kappas_from_modulation(
    spec: &LatticeSpec,
    params: &ModulationParams,
    regime: KappaRegime,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>), SpecialError> {
    match regime {
        KappaRegime::A => {
            let k = kappas_regime_a(spec, params)?;
            Ok((k.k1, k.k2, k.k3, k.k4))
        }
        KappaRegime::B => {
            let k = kappas_regime_b(spec, params)?;
            Ok((k.k1, k.k2, Vec::new(), Vec::new()))
        }
    }
}

fn check_lengths(spec: &LatticeSpec, params: &ModulationParams) -> Result<(), SpecialError> {
    if params.lambda().len() != spec.num_cavities() {
        return Err(SpecialError::LengthMismatch(format!(
            "lambda has {} entries, lattice has {} cavities",
            params.lambda().len(),
            spec.num_cavities()
        )));
    }
    if params.gamma().len() != spec.num_resonators() {
        return Err(SpecialError::LengthMismatch(format!(
            "gamma has {} entries, lattice has {} resonators",
            params.gamma().len(),
            spec.num_resonators()
        )));
    }
    Ok(())
}
