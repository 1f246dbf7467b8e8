//! `daf train`: fit per seed, write checkpoint(s), history CSV(s), and
//! the run record.

use std::fs;
use std::time::Instant;

use daf_core::metrics::{markdown_row, TABLE_HEADER, TABLE_SEPARATOR};
use daf_core::model::{save_checkpoint, Checkpoint};
use daf_core::train::history_csv;
use daf_core::Result;

use crate::args::TrainArgs;
use crate::commands::{load_or_generate, run_seed, RunRecord, SeedRecord};
use crate::run_config::{resolve, RUN_FORMAT_VERSION};

pub fn run(args: &TrainArgs) -> Result<()> {
    let mut rc = resolve(&args.common)?;
    let out_dir = rc.out_path();
    fs::create_dir_all(&out_dir)?;
    let splits = load_or_generate(&mut rc)?;
    let config_json = rc.json();

    let started = Instant::now();
    let mut records = Vec::new();
    println!("{TABLE_HEADER}");
    println!("{TABLE_SEPARATOR}");
    for &seed in &rc.seeds {
        let outcome = run_seed(&rc, &splits, seed)?;
        let suffix = if rc.seeds.len() == 1 {
            String::new()
        } else {
            format!("_seed{seed}")
        };
        fs::write(
            out_dir.join(format!("history{suffix}.csv")),
            history_csv(&outcome.history, outcome.stopped_early, &config_json),
        )?;
        save_checkpoint(
            &out_dir.join(format!("checkpoint{suffix}.daf")),
            &Checkpoint {
                config: outcome.model_config.clone(),
                modalities: outcome.model_modalities,
                seed,
                params: outcome.params.clone(),
            },
        )?;
        println!(
            "{}",
            markdown_row(
                &format!("{} [seed {seed}]", rc.modalities.label()),
                rc.modalities.embedding_label(),
                &outcome.metrics
            )
        );
        eprintln!(
            "seed {seed}: best epoch {} (val MSE {:.6}), {} epochs run{}",
            outcome.best_epoch,
            outcome.best_val_mse,
            outcome.history.len(),
            if outcome.stopped_early {
                ", stopped early"
            } else {
                ""
            }
        );
        records.push(SeedRecord::from(&outcome));
    }

    let record = RunRecord {
        format_version: RUN_FORMAT_VERSION,
        config: &rc,
        seeds: records,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };
    fs::write(
        out_dir.join("run.json"),
        serde_json::to_vec_pretty(&record)?,
    )?;
    eprintln!("artifacts written to {}", out_dir.display());
    Ok(())
}
