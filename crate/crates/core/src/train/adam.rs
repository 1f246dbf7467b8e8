//! Bias-corrected Adam.

use crate::error::{DafError, Result};
use crate::model::ParamSet;
use crate::tensor::Tensor;
use crate::train::TrainConfig;

/// Per-parameter first/second moment buffers plus the step counter.
#[derive(Clone, Debug)]
pub struct OptimState {
    step: u64,
    slots: Vec<(String, Moments)>,
}

#[derive(Clone, Debug)]
struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl OptimState {
    pub fn new(params: &ParamSet) -> Self {
        OptimState {
            step: 0,
            slots: params
                .entries()
                .iter()
                .map(|(n, t)| {
                    (
                        n.clone(),
                        Moments {
                            m: vec![0.0; t.len()],
                            v: vec![0.0; t.len()],
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One update: m ← β₁m + (1−β₁)g; v ← β₂v + (1−β₂)g²;
/// θ ← θ − lr·m̂/(√v̂ + ε) with m̂, v̂ bias-corrected by the
/// incremented step count.
pub fn adam_step(
    params: &mut ParamSet,
    grads: &[(String, Tensor)],
    state: &mut OptimState,
    cfg: &TrainConfig,
) -> Result<()> {
    if grads.len() != state.slots.len() {
        return Err(DafError::InvalidArgument {
            op: "adam_step",
            detail: format!(
                "{} gradients for {} state slots",
                grads.len(),
                state.slots.len()
            ),
        });
    }
    let t = state.step + 1;
    let bc1 = 1.0 - cfg.beta1.powi(t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t as i32);

    for (slot, (gname, grad)) in state.slots.iter_mut().zip(grads) {
        let (pname, param) = params
            .entries_mut()
            .iter_mut()
            .find(|(n, _)| n == &slot.0)
            .ok_or_else(|| DafError::InvalidArgument {
                op: "adam_step",
                detail: format!("state slot `{}` has no parameter", slot.0),
            })?;
        if gname != pname {
            return Err(DafError::InvalidArgument {
                op: "adam_step",
                detail: format!("gradient `{gname}` does not match parameter `{pname}`"),
            });
        }
        let moments = &mut slot.1;
        for ((theta, g), (m, v)) in param
            .data_mut()
            .iter_mut()
            .zip(grad.data())
            .zip(moments.m.iter_mut().zip(moments.v.iter_mut()))
        {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            let update = cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            *theta -= update;
            if !theta.is_finite() {
                return Err(DafError::NonFinite {
                    context: format!("adam_step: parameter `{pname}`"),
                });
            }
        }
    }
    state.step = t;
    Ok(())
}
