//! Evaluation protocol: MAE, Pearson correlation, 7-class accuracy,
//! binary accuracy/F1 with neutral exclusion, and ROC/AUC.
//!
//! Neutral means a label of exactly 0. The binary decision threshold
//! is ŷ > 0 (a prediction of exactly 0 counts as negative). ROC points
//! sweep the sorted unique scores; ties are grouped so the trapezoidal
//! area equals the pairwise statistic P(s⁺ > s⁻) + ½P(tie) exactly,
//! not just approximately.

use serde::{Deserialize, Serialize};

use crate::error::{DafError, Result};
use crate::train::Prediction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores ≥ threshold are classified positive at this point.
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub acc2: f64,
    /// Positive-class F1 on the neutral-excluded set.
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    /// True when a zero-denominator precision or recall was reported
    /// as 0.
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    /// None when correlation is undefined (constant inputs or n < 2).
    pub cc: Option<f64>,
    pub acc7: f64,
    /// None when every sample is neutral.
    pub binary: Option<BinaryMetrics>,
    /// F1 computed without excluding neutrals (neutral counts as
    /// negative) — the other reading of the protocol.
    pub f1_neutral_as_negative: Option<f64>,
    /// None when one class is absent after neutral exclusion.
    pub auc: Option<f64>,
    pub roc_points: Vec<RocPoint>,
    pub n_total: usize,
    pub n_neutral_excluded: usize,
}

/// (1/n)·Σ|ŷᵢ − yᵢ|.
pub fn mae(y_hat: &[f64], y: &[f64]) -> Result<f64> {
    if y_hat.is_empty() || y_hat.len() != y.len() {
        return Err(DafError::EmptyInput("mae"));
    }
    Ok(y_hat.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / y_hat.len() as f64)
}

/// Pearson correlation. Errors (never NaN) on constant input or n < 2.
pub fn pearson_cc(y_hat: &[f64], y: &[f64]) -> Result<f64> {
    if y_hat.len() != y.len() || y_hat.len() < 2 {
        return Err(DafError::UndefinedMetric(
            "pearson correlation needs at least two samples".to_string(),
        ));
    }
    let n = y_hat.len() as f64;
    let mean_a = y_hat.iter().sum::<f64>() / n;
    let mean_b = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (a, b) in y_hat.iter().zip(y) {
        let da = a - mean_a;
        let db = b - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(DafError::UndefinedMetric(
            "pearson correlation is undefined for constant input".to_string(),
        ));
    }
    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// round(clamp(v, −3, 3)), rounding half away from zero.
pub fn discretize7(v: f64) -> Result<i32> {
    if !v.is_finite() {
        return Err(DafError::NonFinite {
            context: "discretize7".to_string(),
        });
    }
    Ok(v.clamp(-3.0, 3.0).round() as i32)
}

/// Fraction of samples whose discretized prediction matches the
/// discretized label.
pub fn acc7(y_hat: &[f64], y: &[f64]) -> Result<f64> {
    if y_hat.is_empty() || y_hat.len() != y.len() {
        return Err(DafError::EmptyInput("acc7"));
    }
    let mut correct = 0usize;
    for (a, b) in y_hat.iter().zip(y) {
        if discretize7(*a)? == discretize7(*b)? {
            correct += 1;
        }
    }
    Ok(correct as f64 / y_hat.len() as f64)
}

/// Binary accuracy and positive-class F1 after excluding samples with
/// label exactly 0. Predicted positive iff ŷ > 0.
pub fn binary_eval(y_hat: &[f64], y: &[f64]) -> Result<BinaryMetrics> {
    if y_hat.is_empty() || y_hat.len() != y.len() {
        return Err(DafError::EmptyInput("binary_eval"));
    }
    let kept: Vec<(bool, bool)> = y_hat
        .iter()
        .zip(y)
        .filter(|(_, &label)| label != 0.0)
        .map(|(&pred, &label)| (pred > 0.0, label > 0.0))
        .collect();
    if kept.is_empty() {
        return Err(DafError::UndefinedMetric(
            "binary metrics: every sample is neutral".to_string(),
        ));
    }
    Ok(confusion_metrics(&kept))
}

fn confusion_metrics(pairs: &[(bool, bool)]) -> BinaryMetrics {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    for &(pred, actual) in pairs {
        match (pred, actual) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| -> f64 {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        degenerate = true;
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    BinaryMetrics {
        acc2: (tp + tn) as f64 / pairs.len() as f64,
        f1,
        precision,
        recall,
        degenerate,
    }
}

/// ROC curve and AUC on the neutral-excluded set (positive iff y > 0).
///
/// The curve sweeps thresholds over the sorted unique scores, grouping
/// ties; the area accumulates the grouped trapezoids as integers and
/// divides once, which makes it exactly the tie-adjusted pairwise
/// probability.
pub fn roc_auc(y_hat: &[f64], y: &[f64]) -> Result<(f64, Vec<RocPoint>)> {
    if y_hat.is_empty() || y_hat.len() != y.len() {
        return Err(DafError::EmptyInput("roc_auc"));
    }
    let mut scored: Vec<(f64, bool)> = y_hat
        .iter()
        .zip(y)
        .filter(|(_, &label)| label != 0.0)
        .map(|(&score, &label)| (score, label > 0.0))
        .collect();
    let positives = scored.iter().filter(|(_, pos)| *pos).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(DafError::UndefinedMetric(format!(
            "roc_auc needs both classes after neutral exclusion, got {positives} positive and {negatives} negative"
        )));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (p, n) = (positives as f64, negatives as f64);
    let mut tp = 0u64;
    let mut fp = 0u64;
    // Σ over tie groups of n_g·(2·tp_before + p_g) = 2·wins + ties.
    let mut area_acc = 0.0;
    let mut i = 0;
    while i < scored.len() {
        let score = scored[i].0;
        let mut pg = 0u64;
        let mut ng = 0u64;
        while i < scored.len() && scored[i].0 == score {
            if scored[i].1 {
                pg += 1;
            } else {
                ng += 1;
            }
            i += 1;
        }
        area_acc += ng as f64 * (2.0 * tp as f64 + pg as f64);
        tp += pg;
        fp += ng;
        points.push(RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
            threshold: score,
        });
    }
    Ok((area_acc / (2.0 * p * n), points))
}

/// Assemble the full report. Metrics that are undefined on the data
/// (single class, all-neutral, constant correlation input) come back
/// as `None`; genuine errors propagate.
pub fn full_report(predictions: &[Prediction]) -> Result<MetricsReport> {
    if predictions.is_empty() {
        return Err(DafError::EmptyInput("full_report"));
    }
    let y_hat: Vec<f64> = predictions.iter().map(|p| p.y_hat).collect();
    let y: Vec<f64> = predictions.iter().map(|p| p.y).collect();

    fn undefined_to_none<T>(r: Result<T>) -> Result<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(DafError::UndefinedMetric(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    let mae = mae(&y_hat, &y)?;
    let cc = undefined_to_none(pearson_cc(&y_hat, &y))?;
    let acc7 = acc7(&y_hat, &y)?;
    let binary = undefined_to_none(binary_eval(&y_hat, &y))?;
    let f1_neutral_as_negative = {
        let pairs: Vec<(bool, bool)> = y_hat
            .iter()
            .zip(&y)
            .map(|(&pred, &label)| (pred > 0.0, label > 0.0))
            .collect();
        let m = confusion_metrics(&pairs);
        Some(m.f1)
    };
    let (auc, roc_points) = match roc_auc(&y_hat, &y) {
        Ok((a, pts)) => (Some(a), pts),
        Err(DafError::UndefinedMetric(_)) => (None, Vec::new()),
        Err(e) => return Err(e),
    };
    let n_neutral_excluded = y.iter().filter(|&&l| l == 0.0).count();

    Ok(MetricsReport {
        mae,
        cc,
        acc7,
        binary,
        f1_neutral_as_negative,
        auc,
        roc_points,
        n_total: predictions.len(),
        n_neutral_excluded,
    })
}

// ── Emission ────────────────────────────────────────────────────────

pub fn report_json(report: &MetricsReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// ROC points as CSV with self-describing comment lines.
pub fn roc_csv(points: &[RocPoint], config_json: &str) -> String {
    let mut out = String::new();
    out.push_str("# format: daf.roc.v1\n");
    out.push_str(&format!("# config: {config_json}\n"));
    out.push_str("fpr,tpr,threshold\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.fpr, p.tpr, p.threshold));
    }
    out
}

pub const TABLE_HEADER: &str =
    "| Modality | Embedding | Accuracy ↑ | F1-score ↑ | MAE ↓ | 7-Class Acc. (%) ↑ |";
pub const TABLE_SEPARATOR: &str = "|---|---|---|---|---|---|";

/// One table row in the comparison-table shape.
pub fn markdown_row(modality: &str, embedding: &str, report: &MetricsReport) -> String {
    let acc = report
        .binary
        .map_or("n/a".to_string(), |b| format!("{:.3}", b.acc2));
    let f1 = report
        .binary
        .map_or("n/a".to_string(), |b| format!("{:.3}", b.f1));
    format!(
        "| {} | {} | {} | {} | {:.3} | {:.2} |",
        modality,
        embedding,
        acc,
        f1,
        report.mae,
        report.acc7 * 100.0
    )
}

/// Self-contained SVG line plot of a ROC curve, AUC in the title.
pub fn roc_svg(points: &[RocPoint], auc: f64, config_json: &str) -> String {
    let (w, h, margin) = (480.0, 480.0, 50.0);
    let plot = w - 2.0 * margin;
    let px = |fpr: f64| margin + fpr * plot;
    let py = |tpr: f64| h - margin - tpr * plot;
    let path: Vec<String> = points
        .iter()
        .map(|p| format!("{:.2},{:.2}", px(p.fpr), py(p.tpr)))
        .collect();
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "  <desc>format: daf.roc-svg.v1; config: {}</desc>\n",
        config_json.replace('<', "&lt;").replace('>', "&gt;")
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">ROC curve (AUC = {:.4})</text>\n",
        w / 2.0,
        auc
    ));
    svg.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n  <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        m = margin,
        b = h - margin,
        r = w - margin
    ));
    svg.push_str(&format!(
        "  <line x1=\"{m}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{m}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n",
        m = margin,
        b = h - margin,
        r = w - margin
    ));
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n",
        path.join(" ")
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">false positive rate</text>\n",
        w / 2.0,
        h - 14.0
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">true positive rate</text>\n",
        h / 2.0,
        h / 2.0
    ));
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force pairwise AUC: P(s⁺ > s⁻) + ½P(tie) over all
    /// (positive, negative) pairs, independent of the sweep code.
    fn pairwise_auc(y_hat: &[f64], y: &[f64]) -> Option<f64> {
        let pos: Vec<f64> = y_hat
            .iter()
            .zip(y)
            .filter(|(_, &l)| l > 0.0)
            .map(|(&s, _)| s)
            .collect();
        let neg: Vec<f64> = y_hat
            .iter()
            .zip(y)
            .filter(|(_, &l)| l != 0.0 && l < 0.0)
            .map(|(&s, _)| s)
            .collect();
        if pos.is_empty() || neg.is_empty() {
            return None;
        }
        let mut wins = 0u64;
        let mut ties = 0u64;
        for &sp in &pos {
            for &sn in &neg {
                if sp > sn {
                    wins += 1;
                } else if sp == sn {
                    ties += 1;
                }
            }
        }
        Some((wins as f64 + 0.5 * ties as f64) / (pos.len() as f64 * neg.len() as f64))
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, -2.0], &[1.0, -2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mae(&[], &[]).is_err());
    }

    #[test]
    fn mae_matches_independent_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..64).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..64).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut total = 0.0;
        for i in 0..a.len() {
            total += (a[i] - b[i]).abs();
        }
        assert!((mae(&a, &b).unwrap() - total / 64.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_affine_is_one() {
        let a = [0.3, -1.0, 2.5, 0.0];
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((pearson_cc(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_hand_example() {
        // deviations: ŷ [-1,0,1], y [1,-1,0] → cov −1, sds √2·√2 → −0.5
        let cc = pearson_cc(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert!((cc + 0.5).abs() < 1e-12);
    }

    #[test]
    fn pearson_sign_flip_negates() {
        let a = [0.5, 1.5, -2.0, 0.25];
        let b = [1.0, 0.0, -1.0, 2.0];
        let neg_a: Vec<f64> = a.iter().map(|x| -x).collect();
        let cc = pearson_cc(&a, &b).unwrap();
        let cc_neg = pearson_cc(&neg_a, &b).unwrap();
        assert!((cc + cc_neg).abs() < 1e-12);
    }

    #[test]
    fn pearson_constant_input_is_explicit_error() {
        let err = pearson_cc(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).unwrap_err();
        assert!(matches!(err, DafError::UndefinedMetric(_)));
    }

    #[test]
    fn discretize_examples() {
        assert_eq!(discretize7(1.4).unwrap(), 1);
        assert_eq!(discretize7(-2.6).unwrap(), -3);
        assert_eq!(discretize7(3.2).unwrap(), 3);
        assert_eq!(discretize7(0.5).unwrap(), 1);
        assert_eq!(discretize7(-0.5).unwrap(), -1);
        assert!(discretize7(f64::NAN).is_err());
        for k in -3..=3 {
            assert_eq!(discretize7(k as f64).unwrap(), k);
        }
    }

    #[test]
    fn acc7_matches_brute_force_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<f64> = (0..100).map(|_| rng.random_range(-3.5..3.5)).collect();
        let b: Vec<f64> = (0..100).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut correct = 0;
        for i in 0..100 {
            let ca = a[i].clamp(-3.0, 3.0).round() as i32;
            let cb = b[i].clamp(-3.0, 3.0).round() as i32;
            if ca == cb {
                correct += 1;
            }
        }
        assert_eq!(acc7(&a, &b).unwrap(), correct as f64 / 100.0);
    }

    #[test]
    fn binary_examples() {
        let m = binary_eval(&[0.2, -1.1], &[2.0, -3.0]).unwrap();
        assert_eq!((m.acc2, m.f1), (1.0, 1.0));

        // the neutral sample must be ignored entirely
        let with_neutral = binary_eval(&[0.2, 5.0, -1.1], &[2.0, 0.0, -3.0]).unwrap();
        assert_eq!(with_neutral, m);

        let m = binary_eval(&[1.0, 1.0, -1.0, -1.0], &[2.0, -2.0, 2.0, -2.0]).unwrap();
        assert_eq!(m.acc2, 0.5);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.f1, 0.5);
        assert!(!m.degenerate);
    }

    #[test]
    fn all_neutral_is_an_error() {
        assert!(binary_eval(&[1.0, -1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn degenerate_precision_is_flagged_zero() {
        // nothing predicted positive → precision denom 0
        let m = binary_eval(&[-1.0, -2.0], &[1.0, -1.0]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert!(m.degenerate);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn auc_perfect_separation() {
        let (auc, points) =
            roc_auc(&[0.9, 0.8, 0.3, 0.2], &[1.0, 2.0, -1.0, -2.0]).unwrap();
        assert_eq!(auc, 1.0);
        assert_eq!(points.first().unwrap().fpr, 0.0);
        assert_eq!(points.last().unwrap().tpr, 1.0);
        assert_eq!(points.last().unwrap().fpr, 1.0);
    }

    #[test]
    fn auc_interleaved_is_three_quarters() {
        let (auc, _) = roc_auc(&[0.9, 0.8, 0.3, 0.2], &[1.0, -2.0, 1.0, -2.0]).unwrap();
        assert_eq!(auc, 0.75);
    }

    #[test]
    fn all_tied_scores_give_half() {
        let (auc, _) = roc_auc(&[0.5, 0.5, 0.5, 0.5], &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert_eq!(auc, 0.5);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(roc_auc(&[0.1, 0.2], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn auc_equals_pairwise_brute_force_exactly_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            let n = rng.random_range(2..60);
            // coarse grid of scores forces plenty of ties
            let y_hat: Vec<f64> = (0..n)
                .map(|_| (rng.random_range(-4i32..=4) as f64) / 4.0)
                .collect();
            let y: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-3i32..=3) as f64)
                .collect();
            match (roc_auc(&y_hat, &y), pairwise_auc(&y_hat, &y)) {
                (Ok((auc, points)), Some(oracle)) => {
                    assert_eq!(auc, oracle, "trial {trial}: sweep vs pairwise");
                    // monotone curve from (0,0) to (1,1)
                    assert_eq!((points[0].fpr, points[0].tpr), (0.0, 0.0));
                    let last = points.last().unwrap();
                    assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
                    for w in points.windows(2) {
                        assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
                    }
                }
                (Err(_), None) => {}
                (got, want) => panic!("trial {trial}: disagree on definedness: {got:?} vs {want:?}"),
            }
        }
    }

    fn preds(y_hat: &[f64], y: &[f64]) -> Vec<Prediction> {
        y_hat
            .iter()
            .zip(y)
            .enumerate()
            .map(|(i, (&a, &b))| Prediction {
                id: format!("s{i}"),
                y_hat: a,
                y: b,
            })
            .collect()
    }

    #[test]
    fn full_report_perfect_predictions() {
        let y = [2.0, -1.0, 1.0, -2.0];
        let r = full_report(&preds(&y, &y)).unwrap();
        assert_eq!(r.mae, 0.0);
        assert!((r.cc.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.acc7, 1.0);
        let b = r.binary.unwrap();
        assert_eq!((b.acc2, b.f1), (1.0, 1.0));
        assert_eq!(r.auc.unwrap(), 1.0);
        assert_eq!(r.n_neutral_excluded, 0);
    }

    #[test]
    fn full_report_negated_predictions_have_zero_acc2() {
        let y = [2.0, -1.0, 1.0, -2.0];
        let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
        let r = full_report(&preds(&flipped, &y)).unwrap();
        assert_eq!(r.binary.unwrap().acc2, 0.0);
    }

    #[test]
    fn full_report_matches_componentwise_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y_hat: Vec<f64> = (0..50).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..50)
            .map(|_| rng.random_range(-3i32..=3) as f64)
            .collect();
        let r = full_report(&preds(&y_hat, &y)).unwrap();
        assert_eq!(r.mae, mae(&y_hat, &y).unwrap());
        assert_eq!(r.cc.unwrap(), pearson_cc(&y_hat, &y).unwrap());
        assert_eq!(r.acc7, acc7(&y_hat, &y).unwrap());
        assert_eq!(r.binary.unwrap(), binary_eval(&y_hat, &y).unwrap());
        assert_eq!(r.auc.unwrap(), roc_auc(&y_hat, &y).unwrap().0);
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let y_hat = [0.5, -1.0, 2.0, 0.0, -2.5, 1.0];
        let y = [1.0, -1.0, 3.0, 0.0, -2.0, 2.0];
        let r1 = full_report(&preds(&y_hat, &y)).unwrap();
        let perm = [3, 0, 5, 2, 4, 1];
        let y_hat2: Vec<f64> = perm.iter().map(|&i| y_hat[i]).collect();
        let y2: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let r2 = full_report(&preds(&y_hat2, &y2)).unwrap();
        assert_eq!(r1.mae, r2.mae);
        assert_eq!(r1.cc, r2.cc);
        assert_eq!(r1.acc7, r2.acc7);
        assert_eq!(r1.binary, r2.binary);
        assert_eq!(r1.auc, r2.auc);
    }

    #[test]
    fn markdown_row_shape() {
        let y = [2.0, -1.0, 1.0, -2.0];
        let r = full_report(&preds(&y, &y)).unwrap();
        let row = markdown_row("Text only", "BERT", &r);
        assert_eq!(row, "| Text only | BERT | 1.000 | 1.000 | 0.000 | 100.00 |");
        assert_eq!(TABLE_HEADER.matches('|').count(), row.matches('|').count());
    }

    #[test]
    fn roc_csv_starts_at_origin_and_ends_at_one_one() {
        let (auc, points) = roc_auc(&[0.9, 0.1], &[1.0, -1.0]).unwrap();
        let csv = roc_csv(&points, "{}");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[2], "fpr,tpr,threshold");
        assert!(lines[3].starts_with("0,0,"));
        assert!(lines.last().unwrap().starts_with("1,1,"));
        let svg = roc_svg(&points, auc, "{}");
        assert!(svg.contains("<svg") && svg.contains("AUC = 1.0000"));
    }
}
