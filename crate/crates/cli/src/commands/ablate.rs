//! `daf ablate`: the modality × fusion matrix. Each cell trains over
//! every seed; results land in a per-seed CSV, an aggregated markdown
//! table in the comparison-table column order, and — when both dynamic
//! and static cells share a modality set — a static-vs-dynamic summary.

use std::fs;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use daf_core::data::{ModalitySet, Splits};
use daf_core::metrics::{MetricsReport, TABLE_HEADER, TABLE_SEPARATOR};
use daf_core::model::FusionKind;
use daf_core::{DafError, Result};

use crate::args::AblateArgs;
use crate::commands::{load_or_generate, mean_std_cell, run_seed, SeedRecord};
use crate::run_config::{resolve, RunConfig, RUN_FORMAT_VERSION};

const DEFAULT_CELLS: &str = "text|text,audio|text,video|text,audio,video";

struct Cell {
    modalities: ModalitySet,
    fusion: FusionKind,
}

impl Cell {
    fn label(&self) -> String {
        let base = self.modalities.label();
        match self.fusion {
            FusionKind::StaticConcat => format!("{base} (Static Fusion)"),
            _ if self.modalities == ModalitySet::all() => format!("{base} (Dynamic Fusion)"),
            _ => base.to_string(),
        }
    }
}

struct CellResult {
    label: String,
    embedding: &'static str,
    fusion: FusionKind,
    modalities: ModalitySet,
    outcome: std::result::Result<Vec<SeedRecord>, String>,
}

#[derive(Serialize)]
struct AblationRecord<'a> {
    format_version: u32,
    config: &'a RunConfig,
    cells: Vec<CellRecord>,
    wall_clock_secs: f64,
}

#[derive(Serialize)]
struct CellRecord {
    label: String,
    modalities: ModalitySet,
    fusion: FusionKind,
    seeds: Option<Vec<SeedRecord>>,
    error: Option<String>,
}

pub fn run(args: &AblateArgs) -> Result<()> {
    let mut rc = resolve(&args.common)?;
    let cells = build_cells(args, &rc)?;
    if cells.is_empty() {
        return Err(DafError::Config("ablation matrix is empty".to_string()));
    }
    let out_dir = rc.out_path();
    fs::create_dir_all(&out_dir)?;
    let splits = load_or_generate(&mut rc)?;

    let started = Instant::now();
    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|cell| run_cell(&rc, &splits, cell))
        .collect();
    let wall = started.elapsed().as_secs_f64();

    let csv = render_csv(&rc, &results);
    fs::write(out_dir.join("ablation.csv"), &csv)?;
    let md = render_markdown(&results);
    fs::write(out_dir.join("ablation.md"), &md)?;
    println!("{md}");

    if let Some(summary) = render_comparison(&results) {
        fs::write(out_dir.join("comparison.md"), &summary)?;
        println!("{summary}");
    }

    let n_cells = results.len();
    let record = AblationRecord {
        format_version: RUN_FORMAT_VERSION,
        config: &rc,
        cells: results
            .into_iter()
            .map(|r| match r.outcome {
                Ok(seeds) => CellRecord {
                    label: r.label,
                    modalities: r.modalities,
                    fusion: r.fusion,
                    seeds: Some(seeds),
                    error: None,
                },
                Err(msg) => CellRecord {
                    label: r.label,
                    modalities: r.modalities,
                    fusion: r.fusion,
                    seeds: None,
                    error: Some(msg),
                },
            })
            .collect(),
        wall_clock_secs: wall,
    };
    fs::write(
        out_dir.join("run.json"),
        serde_json::to_vec_pretty(&record)?,
    )?;
    eprintln!(
        "{n_cells} cells × {} seeds in {wall:.1}s → {}",
        rc.seeds.len(),
        out_dir.display()
    );
    Ok(())
}

fn build_cells(args: &AblateArgs, rc: &RunConfig) -> Result<Vec<Cell>> {
    let cells_raw = args.cells.as_deref().unwrap_or(DEFAULT_CELLS);
    let mut modality_rows = Vec::new();
    for part in cells_raw.split('|').filter(|p| !p.trim().is_empty()) {
        modality_rows.push(ModalitySet::parse(part)?);
    }
    let fusions: Vec<FusionKind> = if args.fusions.is_empty() {
        vec![rc.fusion]
    } else {
        args.fusions
            .iter()
            .map(|f| f.parse())
            .collect::<Result<_>>()?
    };
    let mut cells = Vec::new();
    for &fusion in &fusions {
        for &modalities in &modality_rows {
            cells.push(Cell { modalities, fusion });
        }
    }
    Ok(cells)
}

fn run_cell(rc: &RunConfig, splits: &Splits, cell: &Cell) -> CellResult {
    let cell_rc = RunConfig {
        modalities: cell.modalities,
        fusion: cell.fusion,
        ..rc.clone()
    };
    let mut seeds = Vec::new();
    let mut failure = None;
    for &seed in &rc.seeds {
        match run_seed(&cell_rc, splits, seed) {
            Ok(outcome) => seeds.push(SeedRecord::from(&outcome)),
            Err(e) => {
                failure = Some(format!("seed {seed}: {e}"));
                break;
            }
        }
    }
    CellResult {
        label: cell.label(),
        embedding: cell.modalities.embedding_label(),
        fusion: cell.fusion,
        modalities: cell.modalities,
        outcome: match failure {
            Some(msg) => Err(msg),
            None => Ok(seeds),
        },
    }
}

fn render_csv(rc: &RunConfig, results: &[CellResult]) -> String {
    let mut out = String::new();
    out.push_str("# format: daf.ablation.v1\n");
    out.push_str(&format!("# config: {}\n", rc.json()));
    out.push_str(
        "modality,embedding,fusion,seed,accuracy,f1,mae,acc7_percent,cc,auc,best_epoch,stopped_early,error\n",
    );
    for r in results {
        match &r.outcome {
            Ok(seeds) => {
                for s in seeds {
                    let m = &s.metrics;
                    let (acc, f1) = m
                        .binary
                        .map_or((String::new(), String::new()), |b| {
                            (b.acc2.to_string(), b.f1.to_string())
                        });
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},\n",
                        r.label,
                        r.embedding,
                        r.fusion,
                        s.seed,
                        acc,
                        f1,
                        m.mae,
                        m.acc7 * 100.0,
                        m.cc.map_or(String::new(), |v| v.to_string()),
                        m.auc.map_or(String::new(), |v| v.to_string()),
                        s.best_epoch,
                        s.stopped_early
                    ));
                }
            }
            Err(msg) => {
                out.push_str(&format!(
                    "{},{},{},,,,,,,,,,\"{}\"\n",
                    r.label,
                    r.embedding,
                    r.fusion,
                    msg.replace('"', "'")
                ));
            }
        }
    }
    out
}

fn metric_columns(seeds: &[SeedRecord]) -> [String; 4] {
    let acc: Vec<f64> = seeds
        .iter()
        .filter_map(|s| s.metrics.binary.map(|b| b.acc2))
        .collect();
    let f1: Vec<f64> = seeds
        .iter()
        .filter_map(|s| s.metrics.binary.map(|b| b.f1))
        .collect();
    let mae: Vec<f64> = seeds.iter().map(|s| s.metrics.mae).collect();
    let acc7: Vec<f64> = seeds.iter().map(|s| s.metrics.acc7 * 100.0).collect();
    [
        mean_std_cell(&acc, 3),
        mean_std_cell(&f1, 3),
        mean_std_cell(&mae, 3),
        mean_std_cell(&acc7, 2),
    ]
}

fn render_markdown(results: &[CellResult]) -> String {
    let mut out = String::new();
    out.push_str(TABLE_HEADER);
    out.push('\n');
    out.push_str(TABLE_SEPARATOR);
    out.push('\n');
    for r in results {
        match &r.outcome {
            Ok(seeds) => {
                let [acc, f1, mae, acc7] = metric_columns(seeds);
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} |\n",
                    r.label, r.embedding, acc, f1, mae, acc7
                ));
            }
            Err(msg) => {
                out.push_str(&format!(
                    "| {} | {} | failed | failed | failed | failed |\n",
                    r.label, r.embedding
                ));
                out.push_str(&format!("<!-- {} -->\n", msg.replace("--", "–")));
            }
        }
    }
    out
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn seed_mean(seeds: &[SeedRecord], pick: impl Fn(&MetricsReport) -> Option<f64>) -> Option<f64> {
    mean_of(seeds.iter().filter_map(|s| pick(&s.metrics)))
}

/// Dynamic-vs-static summary for every modality set that has both.
fn render_comparison(results: &[CellResult]) -> Option<String> {
    let mut lines = Vec::new();
    for r in results {
        if r.fusion == FusionKind::StaticConcat {
            continue;
        }
        let Ok(dyn_seeds) = &r.outcome else { continue };
        let partner = results.iter().find(|s| {
            s.fusion == FusionKind::StaticConcat && s.modalities == r.modalities
        });
        let Some(partner) = partner else { continue };
        let Ok(static_seeds) = &partner.outcome else {
            continue;
        };
        let row = |name: &str,
                   pick: &dyn Fn(&MetricsReport) -> Option<f64>,
                   better_low: bool|
         -> Option<String> {
            let d = seed_mean(dyn_seeds, pick)?;
            let s = seed_mean(static_seeds, pick)?;
            let better = if better_low { d <= s } else { d >= s };
            Some(format!(
                "| {name} | {d:.4} | {s:.4} | {} |",
                if better { "dynamic" } else { "static" }
            ))
        };
        lines.push(format!(
            "### {} — dynamic ({}) vs static fusion\n",
            r.modalities.label(),
            r.fusion
        ));
        lines.push("| Metric | Dynamic | Static | Better |".to_string());
        lines.push("|---|---|---|---|".to_string());
        for entry in [
            row("MAE", &|m: &MetricsReport| Some(m.mae), true),
            row("CC", &|m: &MetricsReport| m.cc, false),
            row(
                "Accuracy",
                &|m: &MetricsReport| m.binary.map(|b| b.acc2),
                false,
            ),
            row(
                "F1-score",
                &|m: &MetricsReport| m.binary.map(|b| b.f1),
                false,
            ),
        ]
        .into_iter()
        .flatten()
        {
            lines.push(entry);
        }
        lines.push(String::new());
    }
    if lines.is_empty() {
        None
    } else {
        Some(lines.join("\n"))
    }
}
