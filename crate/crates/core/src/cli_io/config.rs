//! Scenario configuration (TOML).
//!
//! Every block is optional except `target`; omitted values fall back to the
//! 5.8 GHz ten-slot reference array. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_engine::ElementModel;
use crate::geometry::{
    ArrayLayout, CutPlane, FocalTarget, FrequencySpec, ObservationGrid, Point3, SlotColumnSpec,
};
use crate::synthesis::Method;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_frequency")]
    pub frequency_hz: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantization_bits: Option<u32>,
    #[serde(default)]
    pub layout: LayoutConfig,
    #[serde(default)]
    pub element_model: ElementModel,
    pub target: TargetSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_frequency() -> f64 {
    5.8e9
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutConfig {
    pub n_columns: usize,
    pub column_pitch_m: f64,
    pub slots: SlotColumnSpec,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            n_columns: 8,
            column_pitch_m: 0.0208,
            slots: SlotColumnSpec::default(),
        }
    }
}

/// A single focal point (`[target]`) or a list of them (`[[target]]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Single(Point3),
    Sweep(Vec<Point3>),
}

impl TargetSpec {
    pub fn points(&self) -> Vec<Point3> {
        match self {
            TargetSpec::Single(p) => vec![*p],
            TargetSpec::Sweep(ps) => ps.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridConfig {
    AxialLine {
        z_min_m: f64,
        z_max_m: f64,
        samples: usize,
        #[serde(default)]
        x_m: f64,
        #[serde(default)]
        y_m: f64,
    },
    PlaneCut {
        plane: CutPlane,
        lateral_min_m: f64,
        lateral_max_m: f64,
        z_min_m: f64,
        z_max_m: f64,
        /// `[lateral, z]`
        samples: [usize; 2],
    },
    Box {
        min_m: [f64; 3],
        max_m: [f64; 3],
        samples: [usize; 3],
    },
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::AxialLine {
            z_min_m: 0.1,
            z_max_m: 1.5,
            samples: 561,
            x_m: 0.0,
            y_m: 0.0,
        }
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<ObservationGrid> {
        match *self {
            GridConfig::AxialLine {
                z_min_m,
                z_max_m,
                samples,
                x_m,
                y_m,
            } => ObservationGrid::axial_line(x_m, y_m, z_min_m, z_max_m, samples),
            GridConfig::PlaneCut {
                plane,
                lateral_min_m,
                lateral_max_m,
                z_min_m,
                z_max_m,
                samples,
            } => ObservationGrid::plane_cut(
                plane,
                (lateral_min_m, lateral_max_m),
                (z_min_m, z_max_m),
                (samples[0], samples[1]),
            ),
            GridConfig::Box { min_m, max_m, samples } => ObservationGrid::boxed(
                Point3::new(min_m[0], min_m[1], min_m[2]),
                Point3::new(max_m[0], max_m[1], max_m[2]),
                samples,
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    Csv,
    Json,
}

impl FieldFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FieldFormat::Csv => "csv",
            FieldFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<FieldFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("nffbeam-out"),
            formats: vec![FieldFormat::Csv],
        }
    }
}

/// Validated, ready-to-run form of a [`ScenarioConfig`].
#[derive(Clone, Debug)]
pub struct Scenario {
    pub freq: FrequencySpec,
    pub layout: ArrayLayout,
    pub model: ElementModel,
    pub targets: Vec<FocalTarget>,
    pub grid: ObservationGrid,
}

fn semantic(e: Error) -> Error {
    match e {
        Error::InvalidInput(msg) => Error::ConfigSemantic(msg),
        other => other,
    }
}

impl ScenarioConfig {
    pub fn resolve(&self) -> Result<Scenario> {
        let freq = FrequencySpec::new(self.frequency_hz).map_err(semantic)?;
        let layout = ArrayLayout::new(self.layout.n_columns, self.layout.column_pitch_m, self.layout.slots)
            .map_err(semantic)?;
        self.element_model.validate().map_err(semantic)?;

        let points = self.target.points();
        if points.is_empty() {
            return Err(Error::ConfigSemantic("target: at least one focal point required".into()));
        }
        let targets = points
            .into_iter()
            .map(FocalTarget::new)
            .collect::<Result<Vec<_>>>()
            .map_err(semantic)?;

        if self.methods.is_empty() {
            return Err(Error::ConfigSemantic("methods: at least one method required".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::ConfigSemantic(format!("methods: {m} listed twice")));
            }
        }
        if let Some(bits) = self.quantization_bits {
            if !(1..=16).contains(&bits) {
                return Err(Error::ConfigSemantic(format!(
                    "quantization_bits must be in 1..=16, got {bits}"
                )));
            }
        }
        let grid = self.grid.to_grid().map_err(semantic)?;
        if self.output.formats.is_empty() {
            return Err(Error::ConfigSemantic("output.formats: at least one format required".into()));
        }

        Ok(Scenario {
            freq,
            layout,
            model: self.element_model,
            targets,
            grid,
        })
    }

    /// TOML rendering that [`parse_config`] reads back to an equal value.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid(format!("config serialization failed: {e}")))
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

/// Parses and validates a scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        Error::ConfigSyntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    config.resolve()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "frequency_hz = 5.8e9\n\n[target]\nx = 0.0\ny = 0.0\nz = 0.5\n";

    #[test]
    fn minimal_config_gets_reference_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.frequency_hz, 5.8e9);
        assert_eq!(c.layout.n_columns, 8);
        assert_eq!(c.layout.column_pitch_m, 0.0208);
        let s = c.layout.slots;
        assert_eq!(s.n_slots, 10);
        assert_eq!(s.slot_pitch, 0.032);
        assert_eq!((s.slot_length, s.slot_width), (0.0224, 0.004));
        assert_eq!((s.guide_width_a, s.guide_height_b), (0.0404, 0.0198));
        assert_eq!(c.element_model, ElementModel::SlotSubarray { q: 0.0 });
        assert_eq!(c.methods, Method::ALL.to_vec());
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.target, TargetSpec::Single(Point3::new(0.0, 0.0, 0.5)));
    }

    #[test]
    fn negative_frequency_names_invariant() {
        let err = parse_config(&MINIMAL.replace("5.8e9", "-5.8e9")).unwrap_err();
        match err {
            Error::ConfigSemantic(msg) => assert!(msg.contains("FrequencySpec"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_hard_error() {
        let text = format!("{MINIMAL}\n[layout]\ncollumns = 8\n");
        match parse_config(&text).unwrap_err() {
            Error::ConfigSyntax { line, message, .. } => {
                assert!(message.contains("collumns"), "{message}");
                assert_eq!(line, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_config(&format!("colour = 1\n{MINIMAL}")).is_err());
        assert!(parse_config(&format!("{MINIMAL}[element_model]\nkind = \"cosine-q\"\nqq = 1\n")).is_err());
        assert!(parse_config(&format!("{MINIMAL}[grid]\nkind = \"axial-line\"\nz_min_m = 0.1\nz_max_m = 1.0\nsamples = 5\nextra = 1\n")).is_err());
    }

    #[test]
    fn syntax_error_position() {
        match parse_config("frequency_hz = = 3\n").unwrap_err() {
            Error::ConfigSyntax { line, column, .. } => assert_eq!((line, column), (1, 16)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_target_rejected() {
        assert!(matches!(parse_config("frequency_hz = 5.8e9\n"), Err(Error::ConfigSyntax { .. })));
    }

    #[test]
    fn semantic_errors() {
        let cases = [
            format!("{MINIMAL}[layout]\nn_columns = 0\n"),
            format!("{MINIMAL}[layout.slots]\nslot_length_m = 0.05\n"),
            MINIMAL.replace("z = 0.5", "z = -0.5"),
            format!("quantization_bits = 0\n{MINIMAL}"),
            format!("methods = []\n{MINIMAL}"),
            format!("methods = [\"tr\", \"tr\"]\n{MINIMAL}"),
            format!("{MINIMAL}[grid]\nkind = \"axial-line\"\nz_min_m = 0.1\nz_max_m = 1.0\nsamples = 1\n"),
            format!("{MINIMAL}[element_model]\nkind = \"cosine-q\"\nq = -1\n"),
        ];
        for text in &cases {
            assert!(matches!(parse_config(text), Err(Error::ConfigSemantic(_))), "{text}");
        }
    }

    #[test]
    fn full_config_and_round_trip() {
        let text = r#"
frequency_hz = 5.8e9
methods = ["tr", "far-field"]
quantization_bits = 6

[layout]
n_columns = 4
column_pitch_m = 0.025

[layout.slots]
n_slots = 6

[element_model]
kind = "cosine-q"
q = 2

[[target]]
x = 0.0
y = -0.1
z = 0.5

[[target]]
x = 0.0
y = 0.1
z = 0.5

[grid]
kind = "plane-cut"
plane = "e-plane"
lateral_min_m = -0.3
lateral_max_m = 0.3
z_min_m = 0.2
z_max_m = 1.0
samples = [61, 81]

[output]
directory = "out"
formats = ["csv", "json"]
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.element_model, ElementModel::CosineQ { q: 2.0 });
        assert_eq!(c.target.points().len(), 2);
        assert_eq!(c.layout.slots.n_slots, 6);
        assert_eq!(c.layout.slots.slot_pitch, 0.032);
        let back = parse_config(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);

        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn box_grid() {
        let text = format!("{MINIMAL}[grid]\nkind = \"box\"\nmin_m = [0.0, 0.0, 0.5]\nmax_m = [0.0, 0.0, 0.5]\nsamples = [1, 1, 1]\n");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.resolve().unwrap().grid.len(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn print_parse_round_trip(
                f in 1e8f64..1e11,
                n in 1usize..32,
                pitch in 1e-3f64..0.1,
                n_slots in 1usize..20,
                (x, y, z) in (-1.0f64..1.0, -1.0f64..1.0, 0.01f64..3.0),
                bits in proptest::option::of(1u32..=16),
                q in 0.0f64..4.0,
                kind in 0usize..3,
            ) {
                let element_model = match kind {
                    0 => ElementModel::Isotropic,
                    1 => ElementModel::CosineQ { q },
                    _ => ElementModel::SlotSubarray { q },
                };
                let c = ScenarioConfig {
                    frequency_hz: f,
                    methods: vec![Method::FarField, Method::Tr],
                    quantization_bits: bits,
                    layout: LayoutConfig { n_columns: n, column_pitch_m: pitch, slots: SlotColumnSpec { n_slots, ..SlotColumnSpec::default() } },
                    element_model,
                    target: TargetSpec::Single(Point3::new(x, y, z)),
                    grid: GridConfig::PlaneCut { plane: CutPlane::HPlane, lateral_min_m: -x.abs() - 0.1, lateral_max_m: x.abs() + 0.1, z_min_m: 0.1, z_max_m: z + 0.2, samples: [3, 4] },
                    output: OutputConfig::default(),
                };
                let text = c.to_toml().unwrap();
                prop_assert_eq!(parse_config(&text).unwrap(), c);
            }
        }
    }
}
