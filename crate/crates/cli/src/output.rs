use std::fs;
use std::path::Path;

use anyhow::Context;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::run::Outputs;

pub const FILES: [&str; 5] = [
    "trajectories.csv",
    "sets.json",
    "reports.json",
    "ledger.csv",
    "manifest.json",
];

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_all(dir: &Path, command: &str, cfg: &ExperimentConfig, out: &Outputs) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut w = csv::Writer::from_path(dir.join("trajectories.csv"))?;
    if let Some(e) = &out.trajectories {
        let dim = e.members()[0].dim();
        let mut header = vec!["time".to_string(), "member".to_string()];
        header.extend((0..dim).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (m, traj) in e.members().iter().enumerate() {
            for (k, c) in traj.iter_coords().enumerate() {
                let mut row = vec![traj.time(k).to_string(), m.to_string()];
                row.extend(c.iter().map(f64::to_string));
                w.write_record(&row)?;
            }
        }
    } else {
        w.write_record(["time", "member"])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("ledger.csv"))?;
    w.write_record(["member", "time", "energy", "enstrophy", "work"])?;
    for (m, l) in out.ledgers.iter().enumerate() {
        for k in 0..l.times.len() {
            w.write_record([
                m.to_string(),
                l.times[k].to_string(),
                l.energy[k].to_string(),
                l.enstrophy[k].to_string(),
                l.work[k].to_string(),
            ])?;
        }
    }
    w.flush()?;

    write_json(&dir.join("sets.json"), &out.sets)?;
    write_json(
        &dir.join("reports.json"),
        &json!({
            "command": command,
            "exit_code": out.exit_code(),
            "error": out.aborted,
            "checks": out.reports,
        }),
    )?;
    write_json(
        &dir.join("manifest.json"),
        &json!({
            "artifact": "evosys",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": cfg.seed,
            "config": cfg,
            "outputs": FILES,
        }),
    )?;
    Ok(())
}
