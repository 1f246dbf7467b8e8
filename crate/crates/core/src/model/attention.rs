//! Text-guided Luong attention (general score form).
//!
//! score_i = qᵀ·W·k_i over encoded frames, masked softmax over the
//! scores, context = Σ αᵢ·k_i. The same encoded sequence serves as
//! keys and values.

use crate::error::Result;
use crate::tensor::{Tape, Var};

pub struct AttentionOut {
    /// Shape [1 × T]; masked positions are exactly 0, the rest sum to 1.
    pub alpha: Var,
    /// Shape [1 × d].
    pub context: Var,
}

/// `query`: [1 × d], `keys`: [T × d], `score_w`: [d × d], `mask`: length T.
pub fn luong_attention(
    tape: &mut Tape,
    query: Var,
    keys: Var,
    score_w: Var,
    mask: &[bool],
) -> Result<AttentionOut> {
    let projected = tape.matmul(query, score_w)?;
    let scores = tape.matmul_tb(projected, keys)?;
    let alpha = tape.softmax(scores, Some(mask))?;
    let context = tape.matmul(alpha, keys)?;
    Ok(AttentionOut { alpha, context })
}
