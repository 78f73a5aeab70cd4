//! Closed-form conditions under which a type `(alpha, beta)` finds
//! cooperation a best response, one per dilemma, and the tie-count kernel
//! `f(gamma, n)` used by Bertrand competition.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::DilemmaParams;
use crate::numeric::{binomial, decide_nonneg, rational_from_f64, Rational, Scalar};

/// Expected value of `1 / (K + 1)` where `K ~ Binomial(n - 1, 1 - gamma)`:
/// `sum_k C(n-1, k) (1-gamma)^k gamma^(n-1-k) / (k+1)`.
pub fn f_gamma_sum<T: Scalar>(gamma: &T, n: usize) -> T {
    let m = (n - 1) as u32;
    let q = T::one() - gamma.clone();
    (0..=m).fold(T::zero(), |acc, k| {
        acc + binomial::<T>(m, k) * q.powi(k) * gamma.powi(m - k) / T::from_i64(k as i64 + 1)
    })
}

/// `(1 - gamma^n) / (n (1 - gamma))`, valid for `gamma != 1`.
pub fn f_gamma_analytic(gamma: f64, n: usize) -> f64 {
    (1.0 - gamma.powi(n as i32)) / (n as f64 * (1.0 - gamma))
}

/// `f(gamma, n)`, by the analytic identity away from `gamma = 1` and by the
/// binomial sum near it.
pub fn f_gamma(gamma: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("need n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParams(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if gamma < 1.0 - 1e-9 {
        Ok(f_gamma_analytic(gamma, n))
    } else {
        Ok(f_gamma_sum(&gamma, n))
    }
}

/// Outcome of a closed-form cooperation condition.
///
/// `rational` holds iff `binding >= threshold`. The `printed_*` fields carry
/// the commonly quoted form of the condition; for Traveler's Dilemma and
/// Bertrand competition that form omits a deviation and can disagree with
/// the best-response definition, so `rational` is the one to rely on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooperationVerdict {
    pub rational: bool,
    pub binding: f64,
    pub threshold: f64,
    pub printed_rational: bool,
    pub printed_binding: f64,
    pub printed_threshold: f64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParams(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

fn check_params(params: &DilemmaParams) -> Result<()> {
    // The public goods condition is also meaningful at the endpoint rho = 1.
    if let DilemmaParams::Pgg { n, rho, grid } = *params {
        if rho == 1.0 && n >= 2 && grid >= 1 {
            return Ok(());
        }
    }
    params.validate()
}

fn r(x: f64) -> Rational {
    rational_from_f64(x)
}

fn ri(x: i64) -> Rational {
    Rational::from_i64(x)
}

/// Evaluates the dilemma's closed-form cooperation condition at `(alpha, beta)`.
pub fn cooperation_condition(params: &DilemmaParams, alpha: f64, beta: f64) -> Result<CooperationVerdict> {
    check_params(params)?;
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let gamma = (1.0 - alpha) * beta;
    Ok(match *params {
        DilemmaParams::Pd { b, c } => {
            let binding = alpha * beta * b;
            let rational = decide_nonneg(binding - c, b, || r(alpha) * r(beta) * r(b) - r(c));
            same_reading(rational, binding, c)
        }
        DilemmaParams::Pgg { n, rho, .. } => {
            let binding = alpha * beta * rho * (n - 1) as f64;
            let threshold = 1.0 - rho;
            let rational = decide_nonneg(binding - threshold, n as f64, || {
                r(alpha) * r(beta) * r(rho) * ri(n as i64 - 1) - (ri(1) - r(rho))
            });
            same_reading(rational, binding, threshold)
        }
        DilemmaParams::Td { l, h, bonus } => td_condition(alpha, beta, l, h, bonus),
        DilemmaParams::Bertrand { n, l, h } => bertrand_condition(alpha, beta, gamma, n, l, h),
    })
}

fn same_reading(rational: bool, binding: f64, threshold: f64) -> CooperationVerdict {
    CooperationVerdict {
        rational,
        binding,
        threshold,
        printed_rational: rational,
        printed_binding: binding,
        printed_threshold: threshold,
    }
}

/// Traveler's Dilemma. Against an opponent claiming `H` with probability
/// `beta`, the only candidate deviations are claiming `L` and claiming `H-1`:
///
/// * `L`:   `bonus (1 - alpha beta) <= (H - L) beta`
/// * `H-1`: `bonus (1 - 2 alpha) <= 1 - alpha + alpha (H - L)` (when `H - L >= 2`, `beta > 0`)
pub fn td_condition(alpha: f64, beta: f64, l: i64, h: i64, bonus: f64) -> CooperationVerdict {
    let spread = (h - l) as f64;
    let scale = spread.max(bonus);
    let low_margin = spread * beta - bonus * (1.0 - alpha * beta);
    let low_ok = decide_nonneg(low_margin, scale, || {
        ri(h - l) * r(beta) - r(bonus) * (ri(1) - r(alpha) * r(beta))
    });
    let low_bound = if alpha * beta == 1.0 {
        f64::INFINITY
    } else {
        spread * beta / (1.0 - alpha * beta)
    };

    let near_top_applies = h - l >= 2 && beta > 0.0;
    let near_top_ok = !near_top_applies
        || decide_nonneg(1.0 - alpha + alpha * spread - bonus * (1.0 - 2.0 * alpha), scale, || {
            ri(1) - r(alpha) + r(alpha) * ri(h - l) - r(bonus) * (ri(1) - ri(2) * r(alpha))
        });
    let near_top_bound = if near_top_applies && alpha < 0.5 {
        (1.0 - alpha + alpha * spread) / (1.0 - 2.0 * alpha)
    } else {
        f64::INFINITY
    };

    // The commonly quoted form: bonus <= min((H-L)beta/(1-alpha beta), (H-L-1)/(1-2 alpha))
    // for alpha < 1/2, and only the first bound otherwise.
    let half = alpha >= 0.5;
    let printed_second_ok = half
        || decide_nonneg((spread - 1.0) - bonus * (1.0 - 2.0 * alpha), scale, || {
            ri(h - l - 1) - r(bonus) * (ri(1) - ri(2) * r(alpha))
        });
    let printed_bound = if half {
        low_bound
    } else {
        low_bound.min((spread - 1.0) / (1.0 - 2.0 * alpha))
    };

    CooperationVerdict {
        rational: low_ok && near_top_ok,
        binding: low_bound.min(near_top_bound),
        threshold: bonus,
        printed_rational: low_ok && printed_second_ok,
        printed_binding: printed_bound,
        printed_threshold: bonus,
    }
}

/// Bertrand competition. Cooperating at `H` earns `beta^(n-1) H / n`. The
/// candidate deviations are pricing at `L`, earning `L f(gamma, n)`, and
/// undercutting to `H-1`, earning `gamma^(n-1) (H-1)` (when `H - 1 > L`).
fn bertrand_condition(alpha: f64, beta: f64, gamma: f64, n: usize, l: i64, h: i64) -> CooperationVerdict {
    let m = (n - 1) as u32;
    let nf = n as f64;
    let (lf, hf) = (l as f64, h as f64);
    let binding = beta.powi(m as i32);
    let f = f_gamma(gamma, n).expect("gamma in [0,1], n >= 2");
    let low_threshold = f * lf * nf / hf;
    let exact_beta = || r(beta);
    let exact_gamma = || (ri(1) - r(alpha)) * r(beta);

    let low_ok = decide_nonneg(binding * hf - f * lf * nf, hf * nf, || {
        exact_beta().powi(m) * ri(h) - f_gamma_sum(&exact_gamma(), n) * ri(l) * ri(n as i64)
    });

    let undercut = h - 1 > l;
    let undercut_threshold = if undercut {
        nf * gamma.powi(m as i32) * (hf - 1.0) / hf
    } else {
        0.0
    };
    let undercut_ok = !undercut
        || decide_nonneg(binding * hf - nf * gamma.powi(m as i32) * (hf - 1.0), hf * nf, || {
            exact_beta().powi(m) * ri(h) - ri(n as i64) * exact_gamma().powi(m) * ri(h - 1)
        });

    CooperationVerdict {
        rational: low_ok && undercut_ok,
        binding,
        threshold: low_threshold.max(undercut_threshold),
        printed_rational: low_ok,
        printed_binding: binding,
        printed_threshold: low_threshold,
    }
}

/// True iff `beta^(n-1) < L/H`, which rules out cooperation in Bertrand
/// competition for every detection probability, since `f >= 1/n`.
pub fn bertrand_lower_bound_check(beta: f64, l: i64, h: i64, n: usize) -> Result<bool> {
    DilemmaParams::Bertrand { n, l, h }.validate()?;
    check_unit("beta", beta)?;
    let m = (n - 1) as u32;
    let lhs = beta.powi(m as i32) * h as f64;
    let geq = decide_nonneg(lhs - l as f64, h as f64, || r(beta).powi(m) * ri(h) - ri(l));
    Ok(!geq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        for n in 2..20 {
            assert!((f_gamma(0.0, n).unwrap() - 1.0 / n as f64).abs() < 1e-15);
            assert_eq!(f_gamma(1.0, n).unwrap(), 1.0);
        }
        assert!((f_gamma(0.45, 2).unwrap() - 0.725).abs() < 1e-15);
        assert!((f_gamma_sum(&0.45, 2) - 0.725).abs() < 1e-15);
        assert!(f_gamma(1.5, 3).is_err());
        assert!(f_gamma(0.5, 1).is_err());
    }

    #[test]
    fn f_exact_endpoints() {
        for n in 2..30usize {
            assert_eq!(f_gamma_sum(&Rational::from_i64(0), n), Rational::new(1.into(), (n as i64).into()));
            assert_eq!(f_gamma_sum(&Rational::from_i64(1), n), Rational::from_i64(1));
        }
    }

    #[test]
    fn pd_condition() {
        let p = DilemmaParams::Pd { b: 4.0, c: 1.0 };
        let v = cooperation_condition(&p, 0.5, 0.5).unwrap();
        assert!(v.rational && v.printed_rational);
        assert_eq!((v.binding, v.threshold), (1.0, 1.0));
        assert!(!cooperation_condition(&p, 0.5, 0.49).unwrap().rational);
    }

    #[test]
    fn pgg_at_unit_return_is_always_rational() {
        for n in 2..6 {
            let p = DilemmaParams::Pgg { n, rho: 1.0, grid: 10 };
            for k in 0..=10 {
                let a = k as f64 / 10.0;
                assert!(cooperation_condition(&p, a, 1.0 - a).unwrap().rational);
            }
        }
    }

    #[test]
    fn pgg_exact_tie() {
        // alpha beta rho (n-1) = 0.25 * 0.8 = 0.2 = 1 - rho
        let p = DilemmaParams::Pgg { n: 2, rho: 0.8, grid: 10 };
        assert!(cooperation_condition(&p, 0.5, 0.5).unwrap().rational);
        assert!(!cooperation_condition(&p, 0.5, 0.49).unwrap().rational);
    }

    #[test]
    fn bertrand_example() {
        let p = DilemmaParams::Bertrand { n: 2, l: 2, h: 100 };
        let v = cooperation_condition(&p, 0.5, 0.9).unwrap();
        assert!(v.rational && v.printed_rational);
        assert!((v.printed_threshold - 0.029).abs() < 1e-15);
    }

    #[test]
    fn bertrand_undercut_matters() {
        // alpha = 0, beta = 1: everyone prices at H, undercutting to H-1 takes the whole market.
        let p = DilemmaParams::Bertrand { n: 2, l: 2, h: 10 };
        let v = cooperation_condition(&p, 0.0, 1.0).unwrap();
        assert!(!v.rational);
        assert!(v.printed_rational);
    }

    #[test]
    fn bertrand_lower_bound() {
        assert!(bertrand_lower_bound_check(0.5, 2, 100, 8).unwrap());
        assert!(!bertrand_lower_bound_check(1.0, 2, 100, 8).unwrap());
        assert!(!bertrand_lower_bound_check(0.9, 2, 100, 2).unwrap());
        assert!(bertrand_lower_bound_check(0.5, 1, 100, 8).is_err());
    }

    #[test]
    fn td_threshold_example() {
        let v = td_condition(0.6, 0.5, 2, 100, 70.0);
        assert!(v.rational);
        assert!((v.binding - 70.0).abs() < 1e-9);
        assert!(!td_condition(0.6, 0.5, 2, 100, 71.0).rational);
    }

    #[test]
    fn td_quoted_form_misses_the_near_top_deviation() {
        use crate::beliefs::{is_cooperation_rational, TranslucentType};
        use crate::games::make_travelers_dilemma;
        // H-L = 4, alpha = 1/4, beta = 1: claiming H-1 beats claiming H once bonus > 3.5,
        // while the quoted bound is min(16/3, 6).
        let (alpha, beta, l, h) = (0.25, 1.0, 1, 5);
        for (bonus, expected) in [(3.5, true), (4.0, false)] {
            let v = td_condition(alpha, beta, l, h, bonus);
            let d = make_travelers_dilemma(l, h, bonus).unwrap();
            let t = TranslucentType::new(alpha, beta).unwrap();
            let engine = is_cooperation_rational(&d, 0, t, u64::MAX).unwrap();
            assert_eq!(v.rational, expected);
            assert_eq!(engine.verdict, expected);
            assert!(v.printed_rational);
        }
    }
}
