use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::OptimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LbfgsConfig {
    pub history: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Loss evaluations allowed per line search.
    pub max_evals: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: 10,
            c1: 1e-4,
            c2: 0.9,
            max_evals: 25,
        }
    }
}

impl LbfgsConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        if self.history == 0 || self.max_evals == 0 || !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(OptimError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

/// A loss/gradient evaluation, with caller data carried along.
#[derive(Debug, Clone)]
pub struct Evaluation<A> {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub aux: A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Accepted,
    /// Gradient exactly zero; parameters left alone.
    Stationary,
    /// No strong-Wolfe point found; parameters left alone and history cleared.
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct StepOutcome<A> {
    pub status: StepStatus,
    /// Evaluation at the parameters held after the step.
    pub current: Evaluation<A>,
    pub loss_before: f64,
    pub evaluations: usize,
    pub step_length: f64,
}

#[derive(Debug, Clone)]
struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

#[derive(Debug, Clone)]
pub struct LbfgsState<A> {
    pub config: LbfgsConfig,
    history: VecDeque<Pair>,
    cache: Option<(Vec<f64>, Evaluation<A>)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + t * di).collect()
}

/// Minimizer of the cubic through `(a, fa, da)` and `(b, fb, db)`, or the
/// midpoint when the fit is degenerate; kept away from the interval ends.
fn cubic_minimizer(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mid = 0.5 * (a + b);
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let rad = d1 * d1 - da * db;
    let t = if rad >= 0.0 && [fa, fb, da, db].iter().all(|v| v.is_finite()) {
        let d2 = (b - a).signum() * rad.sqrt();
        b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2)
    } else {
        mid
    };
    let margin = 0.1 * (hi - lo);
    if !t.is_finite() {
        mid
    } else {
        t.clamp(lo + margin, hi - margin)
    }
}

impl<A: Clone> LbfgsState<A> {
    pub fn new(config: LbfgsConfig) -> Self {
        Self {
            config,
            history: VecDeque::with_capacity(config.history),
            cache: None,
        }
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn clear_history(&mut self) {
        self.history.clear();
    }

    /// Two-loop recursion: `−H g`. With empty history this is `−g`.
    pub fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q = grad.to_vec();
        let mut alphas = Vec::with_capacity(self.history.len());
        for pair in self.history.iter().rev() {
            let a = pair.rho * dot(&pair.s, &q);
            for (qi, yi) in q.iter_mut().zip(&pair.y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some(last) = self.history.back() {
            let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for (pair, a) in self.history.iter().zip(alphas.into_iter().rev()) {
            let b = pair.rho * dot(&pair.y, &q);
            for (qi, si) in q.iter_mut().zip(&pair.s) {
                *qi += (a - b) * si;
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }

    /// One quasi-Newton iteration with a strong-Wolfe line search.
    ///
    /// The evaluation at the accepted point is cached and reused as the
    /// starting evaluation of the next step.
    pub fn step<E, F>(&mut self, params: &mut [f64], mut eval: F) -> Result<StepOutcome<A>, E>
    where
        F: FnMut(&[f64]) -> Result<Evaluation<A>, E>,
    {
        let mut evaluations = 0;
        let start = match self.cache.take() {
            Some((x, e)) if x.as_slice() == &*params => e,
            _ => {
                evaluations += 1;
                eval(params)?
            }
        };
        let f0 = start.loss;
        let g0 = start.grad.clone();
        let done = |state: &mut Self, status, current: Evaluation<A>, evaluations, step_length, params: &[f64]| {
            state.cache = Some((params.to_vec(), current.clone()));
            StepOutcome {
                status,
                current,
                loss_before: f0,
                evaluations,
                step_length,
            }
        };
        if g0.iter().all(|&g| g == 0.0) || !f0.is_finite() {
            return Ok(done(self, StepStatus::Stationary, start, evaluations, 0.0, params));
        }

        let mut d = self.direction(&g0);
        let mut dphi0 = dot(&g0, &d);
        if !(dphi0 < 0.0) {
            self.history.clear();
            d = self.direction(&g0);
            dphi0 = dot(&g0, &d);
        }
        let t0 = if self.history.is_empty() {
            let gnorm = dot(&g0, &g0).sqrt();
            (1.0 / gnorm).min(1.0)
        } else {
            1.0
        };

        let x0 = params.to_vec();
        let budget = self.config.max_evals;
        let (c1, c2) = (self.config.c1, self.config.c2);
        let mut used = 0;
        let mut probe = |t: f64, used: &mut usize| -> Result<(Evaluation<A>, f64), E> {
            *used += 1;
            let e = eval(&axpy(&x0, t, &d))?;
            let dphi = dot(&e.grad, &d);
            Ok((e, dphi))
        };
        let armijo = |t: f64, f: f64| f.is_finite() && f <= f0 + c1 * t * dphi0;
        let curvature = |dphi: f64| dphi.abs() <= -c2 * dphi0;

        // Bracketing phase.
        let (mut lo, mut f_lo, mut d_lo) = (0.0, f0, dphi0);
        // Evaluation at `lo` once it is a sufficient-decrease point.
        let mut e_lo: Option<Evaluation<A>> = None;
        let mut t = t0;
        let mut bracket: Option<(f64, f64, f64)> = None;
        let mut accepted: Option<(f64, Evaluation<A>)> = None;
        while used < budget {
            let (e, dphi) = probe(t, &mut used)?;
            if !armijo(t, e.loss) || (lo > 0.0 && e.loss >= f_lo) {
                bracket = Some((t, e.loss, dphi));
                break;
            }
            if curvature(dphi) {
                accepted = Some((t, e));
                break;
            }
            if dphi >= 0.0 {
                bracket = Some((lo, f_lo, d_lo));
                lo = t;
                f_lo = e.loss;
                d_lo = dphi;
                e_lo = Some(e);
                break;
            }
            lo = t;
            f_lo = e.loss;
            d_lo = dphi;
            e_lo = Some(e);
            t *= 2.0;
        }

        // Zoom phase: `lo` always satisfies Armijo with the lowest loss so far.
        if accepted.is_none() {
            if let Some((mut hi, mut f_hi, mut d_hi)) = bracket {
                while used < budget && (hi - lo).abs() > 1e-14 * lo.abs().max(hi.abs()) {
                    let t = cubic_minimizer(lo, f_lo, d_lo, hi, f_hi, d_hi);
                    let (e, dphi) = probe(t, &mut used)?;
                    if !armijo(t, e.loss) || e.loss >= f_lo {
                        hi = t;
                        f_hi = e.loss;
                        d_hi = dphi;
                    } else {
                        if curvature(dphi) {
                            accepted = Some((t, e));
                            break;
                        }
                        if dphi * (hi - lo) >= 0.0 {
                            hi = lo;
                            f_hi = f_lo;
                            d_hi = d_lo;
                        }
                        lo = t;
                        f_lo = e.loss;
                        d_lo = dphi;
                        e_lo = Some(e);
                    }
                }
            }
        }
        evaluations += used;
        // Near a minimizer the curvature test can sit below roundoff. A
        // bracket that collapsed or ran out of budget still yields its best
        // sufficient-decrease point.
        if accepted.is_none() {
            accepted = e_lo.map(|e| (lo, e));
        }

        let Some((t, e)) = accepted else {
            self.history.clear();
            return Ok(done(self, StepStatus::LineSearchFailed, start, evaluations, 0.0, params));
        };
        let s: Vec<f64> = d.iter().map(|di| t * di).collect();
        let y: Vec<f64> = e.grad.iter().zip(&g0).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 0.0 && sy.is_finite() {
            if self.history.len() == self.config.history {
                self.history.pop_front();
            }
            self.history.push_back(Pair { s, y, rho: 1.0 / sy });
        }
        // Same expression as in `probe`, so the cached evaluation belongs to
        // exactly these parameters.
        params.copy_from_slice(&axpy(&x0, t, &d));
        Ok(done(self, StepStatus::Accepted, e, evaluations, t, params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::convert::Infallible;

    fn quad<'a>(a: &'a [Vec<f64>], b: &'a [f64]) -> impl Fn(&[f64]) -> Result<Evaluation<()>, Infallible> + 'a {
        move |x| {
            let ax: Vec<f64> = a.iter().map(|row| dot(row, x)).collect();
            let loss = 0.5 * dot(x, &ax) - dot(b, x);
            let grad = ax.iter().zip(b).map(|(u, v)| u - v).collect();
            Ok(Evaluation { loss, grad, aux: () })
        }
    }

    fn rosenbrock(x: &[f64]) -> Result<Evaluation<()>, Infallible> {
        let (a, b) = (x[0], x[1]);
        let loss = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let grad = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        Ok(Evaluation { loss, grad, aux: () })
    }

    #[test]
    fn first_direction_is_steepest_descent() {
        let s = LbfgsState::<()>::new(LbfgsConfig::default());
        assert_eq!(s.direction(&[1.0, -2.0]), vec![-1.0, 2.0]);
    }

    #[test]
    fn two_dimensional_quadratic() {
        let a = vec![vec![3.0, 1.0], vec![1.0, 2.0]];
        let b = vec![1.0, -1.0];
        // x* = A⁻¹ b
        let x_star = [3.0 / 5.0, -4.0 / 5.0];
        let f = quad(&a, &b);
        let mut s = LbfgsState::new(LbfgsConfig::default());
        let mut x = vec![5.0, 5.0];
        for _ in 0..10 {
            s.step(&mut x, &f).unwrap();
        }
        let err = ((x[0] - x_star[0]).powi(2) + (x[1] - x_star[1]).powi(2)).sqrt();
        assert!(err <= 1e-8, "err {err}");
    }

    #[test]
    fn rosenbrock_converges() {
        let mut s = LbfgsState::new(LbfgsConfig::default());
        let mut x = vec![-1.2, 1.0];
        let mut loss = f64::INFINITY;
        for _ in 0..200 {
            loss = s.step(&mut x, rosenbrock).unwrap().current.loss;
        }
        assert!(loss <= 1e-6, "loss {loss}");
    }

    #[test]
    fn loss_never_increases() {
        let mut s = LbfgsState::new(LbfgsConfig::default());
        let mut x = vec![-1.2, 1.0];
        let mut prev = rosenbrock(&x).unwrap().loss;
        for _ in 0..50 {
            let out = s.step(&mut x, rosenbrock).unwrap();
            assert!(out.current.loss <= prev);
            prev = out.current.loss;
        }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let b = vec![2.0, 3.0];
        let mut s = LbfgsState::new(LbfgsConfig::default());
        let mut x = vec![2.0, 3.0];
        let out = s.step(&mut x, quad(&a, &b)).unwrap();
        assert_eq!(out.status, StepStatus::Stationary);
        assert_eq!(x, vec![2.0, 3.0]);
    }

    #[test]
    fn failed_line_search_skips_the_step() {
        // The reported gradient points uphill, so no step decreases the loss.
        let lying = |x: &[f64]| -> Result<Evaluation<()>, Infallible> {
            Ok(Evaluation { loss: x[0] * x[0], grad: vec![-1.0], aux: () })
        };
        let mut s = LbfgsState::new(LbfgsConfig::default());
        let mut x = vec![1.0];
        let out = s.step(&mut x, lying).unwrap();
        assert_eq!(out.status, StepStatus::LineSearchFailed);
        assert_eq!(x, vec![1.0]);
        assert_eq!(s.history_len(), 0);
    }

    #[test]
    fn exact_line_search_terminates_on_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=10 {
            let m: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let a: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| m[k][i] * m[k][j]).sum::<f64>() + if i == j { 0.5 } else { 0.0 }).collect())
                .collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = quad(&a, &b);
            let mut s = LbfgsState::new(LbfgsConfig { c2: 1e-9, max_evals: 60, ..LbfgsConfig::default() });
            let mut x = vec![0.0; n];
            let mut gnorm = f64::INFINITY;
            for _ in 0..n + 2 {
                let out = s.step(&mut x, &f).unwrap();
                gnorm = dot(&out.current.grad, &out.current.grad).sqrt();
                if gnorm <= 1e-10 {
                    break;
                }
            }
            assert!(gnorm <= 1e-10, "n = {n}: |g| = {gnorm}");
        }
    }
}
