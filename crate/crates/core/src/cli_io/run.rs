//! Scenario execution for the `synth`, `field`, `compare` and `steer`
//! subcommands.
//!
//! Everything written except `summary.json` is a pure function of the
//! configuration and is byte-stable across runs and worker counts.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Scenario, ScenarioConfig};
use super::output::{write_field_map, write_json, write_summary};
use crate::analysis::{compare_methods, steer_sweep, ComparisonReport, FocalReport};
use crate::error::{Error, Result};
use crate::field_engine::total_field;
use crate::geometry::Point3;
use crate::synthesis::{synthesize, ExcitationSet};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Synth,
    Field,
    Compare,
    Steer,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetExcitations {
    pub target_index: usize,
    pub target: Point3,
    pub sets: Vec<ExcitationSet>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub tool_version: String,
    pub subcommand: Subcommand,
    pub config: ScenarioConfig,
    pub layout_hash: String,
    pub fraunhofer_distance_m: f64,
    pub spot_definition: String,
    pub reports: Vec<FocalReport>,
    pub comparisons: Vec<ComparisonReport>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
    pub elapsed_s: f64,
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn json<T: Serialize>(&mut self, name: String, value: &T) -> Result<()> {
        write_json(value, &self.dir.join(&name))?;
        self.files.push(name);
        Ok(())
    }

    fn map(&mut self, stem: &str, map: &crate::field_engine::FieldMap, config: &ScenarioConfig) -> Result<()> {
        for &fmt in &config.output.formats {
            let name = format!("{stem}.{}", fmt.extension());
            write_field_map(map, &self.dir.join(&name), fmt)?;
            self.files.push(name);
        }
        Ok(())
    }
}

fn target_suffix(scenario: &Scenario, i: usize) -> String {
    if scenario.targets.len() > 1 {
        format!("_t{i}")
    } else {
        String::new()
    }
}

fn synthesize_all(config: &ScenarioConfig, scenario: &Scenario) -> Result<Vec<TargetExcitations>> {
    scenario
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let sets = config
                .methods
                .iter()
                .map(|&m| {
                    let exc = synthesize(m, &scenario.layout, t.position(), &scenario.freq)?;
                    match config.quantization_bits {
                        Some(bits) => exc.quantized(bits),
                        None => Ok(exc),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TargetExcitations {
                target_index: i,
                target: t.position(),
                sets,
            })
        })
        .collect()
}

/// Runs one subcommand and writes its artifacts plus `summary.json` into
/// `out_dir` (created if missing).
pub fn run_scenario(config: &ScenarioConfig, command: Subcommand, out_dir: &Path) -> Result<RunSummary> {
    let started = Instant::now();
    let scenario = config.resolve()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut w = Writer {
        dir: out_dir,
        files: Vec::new(),
    };
    let mut reports = Vec::new();
    let mut comparisons = Vec::new();

    match command {
        Subcommand::Synth => {
            let all = synthesize_all(config, &scenario)?;
            w.json("excitations.json".into(), &all)?;
        }
        Subcommand::Field => {
            for te in synthesize_all(config, &scenario)? {
                let suffix = target_suffix(&scenario, te.target_index);
                for exc in &te.sets {
                    let map = total_field(&scenario.layout, exc, scenario.model, &scenario.grid, &scenario.freq)?;
                    w.map(&format!("field_{}{suffix}", exc.method), &map, config)?;
                }
            }
        }
        Subcommand::Compare => {
            for (i, t) in scenario.targets.iter().enumerate() {
                let suffix = target_suffix(&scenario, i);
                let c = compare_methods(&scenario.layout, t, &scenario.freq, scenario.model, &scenario.grid)?;
                for map in &c.maps {
                    let method = map.meta.method.expect("compare maps carry a method");
                    w.map(&format!("compare_{method}{suffix}"), map, config)?;
                }
                w.json(format!("compare{suffix}.json"), &c.report)?;
                comparisons.push(c.report);
            }
        }
        Subcommand::Steer => {
            let out = steer_sweep(&scenario.layout, &scenario.targets, &scenario.freq, scenario.model, &scenario.grid)?;
            for (i, (map, report)) in out.into_iter().enumerate() {
                w.map(&format!("steer_t{i}"), &map, config)?;
                reports.push(report);
            }
            w.json("steer.json".into(), &reports)?;
        }
    }

    let summary = RunSummary {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: command,
        config: config.clone(),
        layout_hash: scenario.layout.hash(),
        fraunhofer_distance_m: scenario.layout.fraunhofer_distance(&scenario.freq),
        spot_definition: "-3 dB: |E| >= peak / sqrt(2), linear interpolation, grid-resolution peak".into(),
        reports,
        comparisons,
        files: w.files,
        elapsed_s: started.elapsed().as_secs_f64(),
    };
    write_summary(&summary, &out_dir.join(SUMMARY_FILE))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::config::parse_config;
    use crate::cli_io::output::read_field_csv;
    use crate::synthesis::Method;
    use std::f64::consts::TAU;

    const DEFAULT: &str = "[target]\nx = 0.0\ny = 0.0\nz = 0.5\n";

    #[test]
    fn synth_quantized_to_lattice() {
        let config = parse_config(&format!("quantization_bits = 6\n{DEFAULT}")).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = run_scenario(&config, Subcommand::Synth, dir.path()).unwrap();
        assert_eq!(summary.files, vec!["excitations.json"]);
        let text = fs::read_to_string(dir.path().join("excitations.json")).unwrap();
        let all: Vec<TargetExcitations> = serde_json::from_str(&text).unwrap();
        assert_eq!(all[0].sets.len(), 3);
        let step = TAU / 64.0;
        for set in &all[0].sets {
            assert_eq!(set.len(), 8);
            for p in &set.phases {
                assert!((p / step - (p / step).round()).abs() < 1e-9, "{p}");
            }
        }
    }

    #[test]
    fn field_point_at_target_sums_magnitudes() {
        let text = "methods = [\"tr\"]\n[element_model]\nkind = \"isotropic\"\n[target]\nx = 0.02\ny = -0.03\nz = 0.5\n[grid]\nkind = \"box\"\nmin_m = [0.02, -0.03, 0.5]\nmax_m = [0.02, -0.03, 0.5]\nsamples = [1, 1, 1]\n";
        let config = parse_config(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        run_scenario(&config, Subcommand::Field, dir.path()).unwrap();
        let rows = read_field_csv(&dir.path().join("field_tr.csv")).unwrap();
        assert_eq!(rows.len(), 1);
        let s = config.resolve().unwrap();
        let exc = synthesize(Method::Tr, &s.layout, s.targets[0].position(), &s.freq).unwrap();
        let bound = crate::analysis::coherent_bound(&s.layout, &exc, s.targets[0].position(), &s.freq).unwrap();
        assert!((rows[0].abs - bound).abs() <= 1e-12 * bound);
    }

    #[test]
    fn every_listed_file_exists() {
        let text = format!(
            "{}\n[output]\nformats = [\"csv\", \"json\"]\n",
            "[[target]]\nx = 0.0\ny = -0.05\nz = 0.5\n[[target]]\nx = 0.0\ny = 0.05\nz = 0.5\n[grid]\nkind = \"plane-cut\"\nplane = \"e-plane\"\nlateral_min_m = -0.3\nlateral_max_m = 0.3\nz_min_m = 0.25\nz_max_m = 1.0\nsamples = [13, 16]"
        );
        let config = parse_config(&text).unwrap();
        for cmd in [Subcommand::Synth, Subcommand::Field, Subcommand::Compare, Subcommand::Steer] {
            let dir = tempfile::tempdir().unwrap();
            let summary = run_scenario(&config, cmd, dir.path()).unwrap();
            assert!(!summary.files.is_empty());
            for f in &summary.files {
                assert!(dir.path().join(f).is_file(), "{cmd:?}: {f}");
            }
            assert!(dir.path().join(SUMMARY_FILE).is_file());
        }
    }

    #[test]
    fn compare_default_scenario_checks_hold() {
        let config = parse_config(DEFAULT).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = run_scenario(&config, Subcommand::Compare, dir.path()).unwrap();
        assert_eq!(summary.comparisons.len(), 1);
        assert!(summary.comparisons[0].checks.all());
    }

    #[test]
    fn standoff_failure_is_runtime_error() {
        // Grid point on a slot of column 0.
        let text = format!("{DEFAULT}[grid]\nkind = \"box\"\nmin_m = [-0.144, -0.0728, 0.0]\nmax_m = [-0.144, -0.0728, 0.0]\nsamples = [1, 1, 1]\n");
        let config = parse_config(&text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = run_scenario(&config, Subcommand::Field, dir.path()).unwrap_err();
        assert!(matches!(err, Error::GridStandoff { index: 0, .. }), "{err:?}");
        assert_eq!(err.exit_code(), 3);
    }
}
