//! File outputs: provenance-headed CSV (12 significant digits, LF line
//! endings, byte-exact for regression testing), JSON summaries, optional
//! gnuplot companion scripts. All files are written atomically.

use std::path::{Path, PathBuf};

use qsync_core::series::ObservableSeries;

use crate::backend::RunOutput;
use crate::error::{CliError, Result};
use crate::scenario::Scenario;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Floats carry 12 significant digits; NaN (the undefined-Pearson marker)
/// prints as `nan`.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.11e}")
    }
}

/// Atomic write: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// The CSV body: provenance header (resolved scenario + code version) as
/// `#` comment lines, then the fixed column schema.
pub fn render_csv(scenario: &Scenario, series: &ObservableSeries) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!("# qsync {VERSION}\n"));
    let resolved = toml::to_string(scenario)
        .map_err(|e| CliError::Runtime(format!("cannot serialize scenario: {e}")))?;
    for line in resolved.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("n,t");
    for label in series.labels() {
        out.push(',');
        out.push_str(label);
    }
    out.push_str(",phase\n");
    for record in series.records() {
        out.push_str(&record.n.to_string());
        out.push(',');
        out.push_str(&fmt_float(record.t));
        for v in &record.values {
            out.push(',');
            out.push_str(&fmt_float(*v));
        }
        out.push(',');
        out.push_str(&record.phase);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_run(
    scenario: &Scenario,
    output: &RunOutput,
    out_dir: &Path,
    wall_time_s: f64,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let stem = scenario.output_stem();
    let csv_path = out_dir.join(format!("{stem}.csv"));
    write_atomic(&csv_path, render_csv(scenario, &output.series)?.as_bytes())?;

    let summary = serde_json::json!({
        "name": scenario.name,
        "backend": scenario.backend.name(),
        "seed": scenario.seed,
        "version": VERSION,
        "csv": csv_path.file_name().and_then(|s| s.to_str()),
        "records": output.series.len(),
        "final_pearson": output.final_pearson,
        "transition_n": output.transition_n,
        "wall_time_s": wall_time_s,
    });
    let summary_path = out_dir.join(format!("{stem}.summary.json"));
    write_atomic(&summary_path, format!("{summary:#}\n").as_bytes())?;

    for (suffix, content) in &output.artifacts {
        let path = out_dir.join(format!("{stem}.{suffix}"));
        write_atomic(&path, content.as_bytes())?;
    }
    if scenario.plot_script {
        let gp = render_plot_script(stem);
        write_atomic(&out_dir.join(format!("{stem}.gp")), gp.as_bytes())?;
    }
    Ok(csv_path)
}

/// A small gnuplot script referencing the CSV; plotting stays out of
/// process.
pub fn render_plot_script(stem: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'collision n'\n\
         plot '{stem}.csv' using 1:3 with lines title 'sx1', \\\n\
         REPLOT     '' using 1:6 with lines title 'sx2', \\\n\
         REPLOT     '' using 1:9 with lines title 'pearson'\n"
    )
    .replace("REPLOT", "    ")
}
