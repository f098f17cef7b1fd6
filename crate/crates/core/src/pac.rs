//! Sample-complexity and advice-complexity calculator.
//!
//! All asymptotic constants are set to 1: the values describe the shape of
//! the bounds, not their magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacParams {
    /// Regret ε ∈ (0, 1).
    pub epsilon: f64,
    /// Confidence δ ∈ (0, 1).
    pub delta: f64,
    /// Refinement distance between successive theories.
    pub d: f64,
    /// Number of iterations.
    pub iterations: u32,
    /// Distinct predicates.
    pub m: u64,
    /// Number of terms.
    pub t: u64,
    /// Place count.
    pub p: u64,
    /// Depth bound.
    pub i: u32,
    /// Arity bound.
    pub j: u32,
    /// Input examples.
    pub inputs: u64,
    /// Constraint-library size.
    pub lib_size: u32,
    /// Constraint arity.
    pub q: u64,
}

impl Default for PacParams {
    fn default() -> Self {
        PacParams {
            epsilon: 0.1,
            delta: 0.05,
            d: 1.0,
            iterations: 10,
            m: 10,
            t: 10,
            p: 2,
            i: 3,
            j: 3,
            inputs: 1,
            lib_size: 4,
            q: 2,
        }
    }
}

impl PacParams {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        // ε = 1 and δ = 1/e are allowed at the boundary for calibration
        if !(open_unit(self.epsilon) || self.epsilon == 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !open_unit(self.delta) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::InvalidParameter(format!("d must be a non-negative number, got {}", self.d)));
        }
        let counts = [
            ("iterations", self.iterations as u64),
            ("m", self.m),
            ("t", self.t),
            ("p", self.p),
            ("i", self.i as u64),
            ("j", self.j as u64),
            ("inputs", self.inputs),
            ("lib_size", self.lib_size as u64),
            ("q", self.q),
        ];
        for (name, v) in counts {
            if v < 1 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// `c = j^i`, the exponent of the hypothesis-space size.
    pub fn c(&self) -> f64 {
        (self.j as f64).powi(self.i as i32)
    }
}

/// A hypothesis-space size together with its natural logarithm; `value` is
/// infinite when it does not fit in an `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSize {
    pub value: f64,
    pub ln: f64,
}

/// `(t·p·m)^(j^i)`, computed in the log domain.
pub fn hypothesis_space_size(t: u64, p: u64, m: u64, i: u32, j: u32) -> Result<SpaceSize> {
    if t == 0 || p == 0 || m == 0 || i == 0 || j == 0 {
        return Err(Error::InvalidParameter("t, p, m, i and j must be at least 1".into()));
    }
    let c = (j as f64).powi(i as i32);
    let ln = c * ((t as f64).ln() + (p as f64).ln() + (m as f64).ln());
    if !ln.is_finite() {
        return Err(Error::InvalidParameter("hypothesis-space size overflows even in the log domain".into()));
    }
    // direct power where representable; infinite once it overflows
    Ok(SpaceSize { value: (t as f64 * p as f64 * m as f64).powf(c), ln })
}

/// `(1/ε)·[d^L·ln(h0 + d + m) + ln(1/δ)]`.
pub fn sample_complexity(params: &PacParams, h0: f64) -> Result<f64> {
    params.validate()?;
    if h0.is_nan() || h0 < 0.0 {
        return Err(Error::InvalidParameter(format!("h0 must be non-negative, got {h0}")));
    }
    let inner = if h0.is_finite() {
        (h0 + params.d + params.m as f64).ln()
    } else {
        return Err(Error::InvalidParameter("h0 is not finite; use sample_complexity_ln".into()));
    };
    Ok(finish(params, inner))
}

/// As [`sample_complexity`], taking `ln h0` so that spaces too large for an
/// `f64` still give a finite bound.
pub fn sample_complexity_ln(params: &PacParams, ln_h0: f64) -> Result<f64> {
    params.validate()?;
    let rest = params.d + params.m as f64;
    // ln(h0 + rest) = ln h0 + ln(1 + rest / h0), stable for huge h0
    let inner = if ln_h0 > 700.0 { ln_h0 + (rest * (-ln_h0).exp()).ln_1p() } else { (ln_h0.exp() + rest).ln() };
    Ok(finish(params, inner))
}

fn finish(params: &PacParams, ln_space: f64) -> f64 {
    let growth = params.d.powi(params.iterations as i32);
    (growth * ln_space + (1.0 / params.delta).ln()) / params.epsilon
}

/// Preference probabilities of the candidate constraint literals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PrefProbs {
    /// Every literal has the same probability.
    Uniform(f64),
    /// One probability per literal; the length must equal the literal count.
    Explicit(Vec<f64>),
}

/// Ordered selections of `q` out of `t`.
pub fn permutations(t: u64, q: u64) -> f64 {
    if q > t {
        return 0.0;
    }
    (t - q + 1..=t).map(|v| v as f64).product()
}

/// Maximum number of constraint literals, `2^(|𝕌|−1)·P(t, q)`.
pub fn max_constraint_literals(lib_size: u32, t: u64, q: u64) -> f64 {
    2f64.powi(lib_size as i32 - 1) * permutations(t, q)
}

/// Lower and upper bounds on the refinement distance between successive
/// theories: `|D_ℓ − D_ℓ−1|` and the expected number of chosen constraint
/// literals.
pub fn refinement_distance_bounds(
    d_l: f64,
    d_prev: f64,
    lib_size: u32,
    t: u64,
    q: u64,
    probs: &PrefProbs,
) -> Result<(f64, f64)> {
    if lib_size == 0 {
        return Err(Error::InvalidParameter("the library must hold at least one constraint".into()));
    }
    let check = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(Error::InvalidParameter(format!("preference probability {p} is outside [0, 1]")))
        }
    };
    let count = max_constraint_literals(lib_size, t, q);
    let upper = match probs {
        PrefProbs::Uniform(p) => count * check(*p)?,
        PrefProbs::Explicit(ps) => {
            if ps.len() as f64 != count {
                return Err(Error::InvalidParameter(format!(
                    "expected {count} preference probabilities, got {}",
                    ps.len()
                )));
            }
            ps.iter().map(|&p| check(p)).sum::<Result<f64>>()?
        }
    };
    Ok(((d_l - d_prev).abs(), upper))
}

/// Average number of advice examples per iteration, `(n* − |X|)/L`.
pub fn advice_examples(n_star: f64, num_inputs: f64, iterations: u32) -> Result<f64> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("the iteration count must be at least 1".into()));
    }
    Ok((n_star - num_inputs) / iterations as f64)
}

/// Every quantity for one parameter set, as emitted by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacReport {
    pub params: PacParams,
    pub c: f64,
    pub h0: SpaceSize,
    pub n_star: f64,
    pub max_constraint_literals: f64,
    pub advice_per_iteration: f64,
}

pub fn report(params: &PacParams) -> Result<PacReport> {
    params.validate()?;
    let h0 = hypothesis_space_size(params.t, params.p, params.m, params.i, params.j)?;
    let n_star = sample_complexity_ln(params, h0.ln)?;
    Ok(PacReport {
        params: params.clone(),
        c: params.c(),
        h0,
        n_star,
        max_constraint_literals: max_constraint_literals(params.lib_size, params.t, params.q),
        advice_per_iteration: advice_examples(n_star, params.inputs as f64, params.iterations)?,
    })
}
