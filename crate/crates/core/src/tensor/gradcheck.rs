//! Finite-difference gradient checking.
//!
//! Compares tape gradients against central differences
//! `(f(x+h) − f(x−h)) / 2h` computed by re-running the forward pass,
//! which keeps the numeric side fully independent of the backward
//! implementation it is checking.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{DafError, Result};
use crate::tensor::{Tape, Tensor, Var};

/// Denominator floor for the relative error. Central differences of a
/// full-width forward pass carry ~1e-10 of rounding noise at h = 1e-5,
/// so gradients below this scale are compared absolutely (threshold
/// tol·floor = 1e-8 at the default tolerance — two orders above the
/// noise, four below any plausible backward bug).
const REL_ERR_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GradCheckEntry {
    pub name: String,
    /// Worst relative error over the checked elements.
    pub max_rel_err: f64,
    /// Tape gradient at the worst element.
    pub analytic: f64,
    /// Central difference at the worst element.
    pub numeric: f64,
    /// Flat index of the worst element.
    pub element: usize,
    /// How many elements of this parameter were checked.
    pub checked: usize,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.max_rel_err < self.tol)
    }

    pub fn failures(&self) -> Vec<&GradCheckEntry> {
        self.entries
            .iter()
            .filter(|e| e.max_rel_err >= self.tol)
            .collect()
    }

    pub fn max_rel_err(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_rel_err)
            .fold(0.0, f64::max)
    }
}

/// Configuration for one gradient check.
pub struct GradCheck {
    /// Central-difference step.
    pub step: f64,
    /// Pass threshold on the relative error.
    pub tol: f64,
    /// Check only this many elements per parameter (deterministically
    /// sampled). `None` checks every element.
    pub elements_per_param: Option<usize>,
    /// Seed for element sampling.
    pub sample_seed: u64,
    /// Test hook: corrupt the tape gradient of the named parameter
    /// before comparison, to exercise the failure-reporting path.
    pub inject_fault: Option<String>,
}

impl Default for GradCheck {
    fn default() -> Self {
        GradCheck {
            step: 1e-5,
            tol: 1e-4,
            elements_per_param: None,
            sample_seed: 0,
            inject_fault: None,
        }
    }
}

impl GradCheck {
    /// Check `build` — a deterministic scalar function of `params`
    /// expressed as tape operations — at the given point.
    ///
    /// `build` is called with a fresh tape and one `Var` per parameter,
    /// in parameter order, and must return the scalar loss.
    pub fn run<F>(&self, params: &[(String, Tensor)], build: F) -> Result<GradCheckReport>
    where
        F: Fn(&mut Tape, &[Var]) -> Result<Var>,
    {
        let eval = |point: &[(String, Tensor)]| -> Result<f64> {
            let mut tape = Tape::new();
            let vars: Vec<Var> = point.iter().map(|(_, t)| tape.var(t.clone())).collect();
            let loss = build(&mut tape, &vars)?;
            tape.value(loss).item()
        };

        // Two forward passes must agree bit-for-bit (dropout and any
        // other stochasticity must be disabled by the caller).
        let base = eval(params)?;
        let again = eval(params)?;
        if base.to_bits() != again.to_bits() {
            return Err(DafError::NonDeterministic {
                first: base,
                second: again,
            });
        }

        // Tape gradients at the base point.
        let mut tape = Tape::new();
        let vars: Vec<Var> = params.iter().map(|(_, t)| tape.var(t.clone())).collect();
        let loss = build(&mut tape, &vars)?;
        tape.backward(loss)?;
        let mut analytic: Vec<Tensor> = vars
            .iter()
            .map(|&v| tape.grad(v).expect("backward has run"))
            .collect();

        if let Some(fault) = &self.inject_fault {
            if let Some(pos) = params.iter().position(|(n, _)| n == fault) {
                // corrupt every element so sampled checks cannot miss it
                analytic[pos].data_mut().iter_mut().for_each(|g| *g += 1.0);
            } else {
                return Err(DafError::InvalidArgument {
                    op: "grad_check",
                    detail: format!("fault target `{fault}` is not a parameter"),
                });
            }
        }

        let mut point = params.to_vec();
        let mut entries = Vec::with_capacity(params.len());
        for (pi, (name, tensor)) in params.iter().enumerate() {
            let elements = self.select_elements(pi as u64, tensor.len());
            let mut worst = GradCheckEntry {
                name: name.clone(),
                max_rel_err: 0.0,
                analytic: analytic[pi].data().first().copied().unwrap_or(0.0),
                numeric: analytic[pi].data().first().copied().unwrap_or(0.0),
                element: 0,
                checked: elements.len(),
            };
            for &e in &elements {
                let original = point[pi].1.data()[e];
                point[pi].1.data_mut()[e] = original + self.step;
                let plus = eval(&point)?;
                point[pi].1.data_mut()[e] = original - self.step;
                let minus = eval(&point)?;
                point[pi].1.data_mut()[e] = original;

                let numeric = (plus - minus) / (2.0 * self.step);
                let tape_grad = analytic[pi].data()[e];
                let rel = rel_err(tape_grad, numeric);
                if rel >= worst.max_rel_err {
                    worst.max_rel_err = rel;
                    worst.analytic = tape_grad;
                    worst.numeric = numeric;
                    worst.element = e;
                }
            }
            entries.push(worst);
        }

        Ok(GradCheckReport {
            entries,
            tol: self.tol,
        })
    }

    fn select_elements(&self, param_index: u64, len: usize) -> Vec<usize> {
        match self.elements_per_param {
            Some(k) if k < len => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(self.sample_seed.wrapping_add(param_index));
                let mut picked = rand::seq::index::sample(&mut rng, len, k).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..len).collect(),
        }
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(REL_ERR_FLOOR);
    (a - b).abs() / denom
}
