//! Scenario files: a TOML document with `crystal`, `pump`, `geometry`,
//! `sample`, `grid`, `scan` and `output` sections plus a `tasks` list.
//!
//! Units are carried in the key names (`_mm`, `_fs`, `_um`, `_nm`,
//! `_rad_per_fs`). Keys that are absent take the defaults below; unknown
//! keys are rejected.

use std::fmt;
use std::str::FromStr;

use nlint_core::biphoton::Kernel;
use nlint_core::coherence::synchronize_pump_path;
use nlint_core::optics::{duration_for_gamma, make_frequency_grid, suggest_grid_points, SampleModel};
use nlint_core::{Bilayer, Complex64, Crystal, CrystalConfig, Geometry, Grid, Pump};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::SimError;

/// Grid size tried first when the scenario does not fix one.
pub const DEFAULT_GRID_FLOOR: usize = 256;
pub const DEFAULT_SCAN_POINTS: usize = 2001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub tasks: Vec<Task>,
    pub crystal: CrystalSection,
    pub pump: PumpSection,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "joint_spectrum")]
    JointSpectrum,
    #[serde(rename = "schmidt")]
    Schmidt,
    #[serde(rename = "spectrum")]
    Spectrum,
    #[serde(rename = "g1_scan")]
    G1Scan,
    #[serde(rename = "oct_scan")]
    OctScan,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::JointSpectrum, Task::Schmidt, Task::Spectrum, Task::G1Scan, Task::OctScan];

    pub fn name(self) -> &'static str {
        match self {
            Task::JointSpectrum => "joint_spectrum",
            Task::Schmidt => "schmidt",
            Task::Spectrum => "spectrum",
            Task::G1Scan => "g1_scan",
            Task::OctScan => "oct_scan",
        }
    }

    /// Whether the task works on the `(Ws, Wi)` joint spectrum.
    pub fn is_spectral(self) -> bool {
        matches!(self, Task::JointSpectrum | Task::Schmidt | Task::Spectrum)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Crystal preset plus optional per-parameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    #[serde(default = "default_preset")]
    pub preset: String,
    pub length_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gv_mismatch_fs_per_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk_off_fs_per_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idler_group_delay_fs_per_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idler_phase_index: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_pump_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_signal_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_idler_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

fn default_preset() -> String {
    "mgo-ln".to_string()
}

impl CrystalSection {
    pub fn preset(name: &str, length_mm: f64) -> Self {
        Self {
            preset: name.to_string(),
            length_mm,
            gv_mismatch_fs_per_mm: None,
            walk_off_fs_per_mm: None,
            idler_group_delay_fs_per_mm: None,
            idler_phase_index: None,
            lambda_pump_nm: None,
            lambda_signal_nm: None,
            lambda_idler_nm: None,
            sigma: None,
        }
    }
}

/// Exactly one of the three keys sets the pulse duration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_fs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ps: Option<f64>,
    /// Duration chosen so that the crystal/pump ratio equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

/// Arm lengths in mm. `z3` is the scanned coordinate and is not set here.
/// Without `zp2_mm` the pump path to the second crystal is synchronized.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default)]
    pub z1_mm: f64,
    #[serde(default)]
    pub z2_mm: f64,
    #[serde(default)]
    pub zp1_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zp2_mm: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SampleSection {
    #[default]
    Mirror,
    Uniform {
        /// `[re, im]`.
        r: [f64; 2],
    },
    Bilayer {
        r0: f64,
        r1: f64,
        thickness_um: f64,
        index: f64,
        /// Defaults to the idler carrier.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        carrier_rad_per_fs: Option<f64>,
    },
    /// Slab between two media at normal incidence, Fresnel coefficients.
    GlassSlab {
        #[serde(default = "slab_thickness")]
        thickness_um: f64,
        #[serde(default = "slab_ambient")]
        ambient_index: f64,
        #[serde(default = "slab_layer")]
        layer_index: f64,
        #[serde(default = "slab_substrate")]
        substrate_index: f64,
    },
    /// Rows of `[idler detuning (rad/fs), re r, im r]`.
    Tabulated { table: Vec<[f64; 3]> },
}

fn slab_thickness() -> f64 {
    20.0
}
fn slab_ambient() -> f64 {
    1.0
}
fn slab_layer() -> f64 {
    1.5
}
fn slab_substrate() -> f64 {
    1.3
}

impl SampleSection {
    pub fn glass_slab() -> Self {
        SampleSection::GlassSlab {
            thickness_um: slab_thickness(),
            ambient_index: slab_ambient(),
            layer_index: slab_layer(),
            substrate_index: slab_substrate(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    #[default]
    Exact,
    Gaussian,
}

impl From<KernelChoice> for Kernel {
    fn from(k: KernelChoice) -> Self {
        match k {
            KernelChoice::Exact => Kernel::Exact,
            KernelChoice::Gaussian => Kernel::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Nodes per frequency axis; picked automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub kernel: KernelChoice,
}

/// Path-delay scan for `g1_scan` and `oct_scan`, in µm of `delta_z`.
/// Without bounds the scan is centred on zero and covers every envelope.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Raise the point count to resolve the optical fringes.
    #[serde(default)]
    pub fringes: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}`, expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// Physical objects built from a validated scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub crystal: Crystal,
    pub pump: Pump,
    pub geometry: Geometry,
    pub sample: SampleModel<f64>,
    pub kernel: Kernel,
    /// Joint-spectrum grid, present when a spectral task is requested.
    pub grid: Option<Grid>,
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, SimError> {
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| SimError::Validation(e.to_string().trim_end().to_string()))?;
    scenario.setup()?;
    Ok(scenario)
}

fn invalid(path: &str, reason: impl fmt::Display) -> SimError {
    SimError::Validation(format!("{path}: {reason}"))
}

fn crystal_key(field: &str) -> &str {
    match field {
        "gv_mismatch" => "gv_mismatch_fs_per_mm",
        "walk_off" => "walk_off_fs_per_mm",
        other => other,
    }
}

impl Scenario {
    /// Canonical TOML text; the digest is taken over this.
    pub fn render(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// SHA-256 of [`Scenario::render`], hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }

    pub fn setup(&self) -> Result<Setup, SimError> {
        if self.tasks.is_empty() {
            return Err(invalid("tasks", "at least one task is required"));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            if self.tasks[..i].contains(t) {
                return Err(invalid("tasks", format!("`{t}` listed twice")));
            }
        }
        let crystal = self.build_crystal()?;
        let pump = self.build_pump(&crystal)?;
        let geometry = self.build_geometry(&crystal)?;
        let sample = self.build_sample(&crystal)?;
        self.check_scan()?;
        let kernel = Kernel::from(self.grid.kernel);
        let grid = if self.tasks.iter().any(|t| t.is_spectral()) {
            Some(self.build_grid(kernel, &crystal, &pump)?)
        } else {
            None
        };
        Ok(Setup { crystal, pump, geometry, sample, kernel, grid })
    }

    fn build_crystal(&self) -> Result<Crystal, SimError> {
        let c = &self.crystal;
        let base = match c.preset.as_str() {
            "mgo-ln" => Crystal::mgo_lithium_niobate(1.0).expect("preset is valid").config(),
            other => return Err(invalid("crystal.preset", format!("unknown preset `{other}`, expected mgo-ln"))),
        };
        let cfg = CrystalConfig {
            length_mm: c.length_mm,
            gv_mismatch: c.gv_mismatch_fs_per_mm.unwrap_or(base.gv_mismatch),
            walk_off: c.walk_off_fs_per_mm.unwrap_or(base.walk_off),
            idler_group_delay: c.idler_group_delay_fs_per_mm.unwrap_or(base.idler_group_delay),
            idler_phase_index: c.idler_phase_index.unwrap_or(base.idler_phase_index),
            lambda_pump_nm: c.lambda_pump_nm.unwrap_or(base.lambda_pump_nm),
            lambda_signal_nm: c.lambda_signal_nm.unwrap_or(base.lambda_signal_nm),
            lambda_idler_nm: c.lambda_idler_nm.unwrap_or(base.lambda_idler_nm),
            sigma: c.sigma.unwrap_or(base.sigma),
        };
        if !c.idler_group_delay_fs_per_mm.unwrap_or(0.0).is_finite() {
            return Err(invalid("crystal.idler_group_delay_fs_per_mm", "must be finite"));
        }
        Crystal::new(cfg).map_err(|e| match e {
            nlint_core::Error::Domain { field, reason } => invalid(&format!("crystal.{}", crystal_key(field)), reason),
            other => SimError::in_section("crystal", other),
        })
    }

    fn build_pump(&self, crystal: &Crystal) -> Result<Pump, SimError> {
        let p = &self.pump;
        let given = [p.duration_fs.is_some(), p.duration_ps.is_some(), p.gamma.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(invalid("pump", "set exactly one of duration_fs, duration_ps, gamma"));
        }
        let (built, key) = if let Some(t) = p.duration_fs {
            (Pump::new(t), "pump.duration_fs")
        } else if let Some(t) = p.duration_ps {
            (Pump::from_ps(t), "pump.duration_ps")
        } else {
            let g = p.gamma.unwrap_or_default();
            if !(g.is_finite() && g > 0.0) {
                return Err(invalid("pump.gamma", format!("must be positive, got {g}")));
            }
            (duration_for_gamma(crystal, g), "pump.gamma")
        };
        built.map_err(|e| match e {
            nlint_core::Error::Domain { reason, .. } => invalid(key, reason),
            other => SimError::in_section("pump", other),
        })
    }

    fn build_geometry(&self, crystal: &Crystal) -> Result<Geometry, SimError> {
        let g = &self.geometry;
        let zp2 = g.zp2_mm.unwrap_or(0.0);
        let geometry = Geometry::new(g.z1_mm, g.z2_mm, 0.0, g.zp1_mm, zp2).map_err(|e| match e {
            nlint_core::Error::Domain { field, reason } => invalid(&format!("geometry.{field}_mm"), reason),
            other => SimError::in_section("geometry", other),
        })?;
        Ok(match g.zp2_mm {
            Some(_) => geometry,
            None => synchronize_pump_path(&geometry, crystal),
        })
    }

    fn build_sample(&self, crystal: &Crystal) -> Result<SampleModel<f64>, SimError> {
        let sample_err = |e: nlint_core::Error| match e {
            nlint_core::Error::Domain { field, reason } => invalid(&format!("sample.{field}"), reason),
            other => SimError::in_section("sample", other),
        };
        let idler = crystal.omega_idler();
        match &self.sample {
            SampleSection::Mirror => Ok(SampleModel::mirror()),
            SampleSection::Uniform { r } => SampleModel::uniform(Complex64::new(r[0], r[1])).map_err(sample_err),
            SampleSection::Bilayer { r0, r1, thickness_um, index, carrier_rad_per_fs } => {
                let carrier = carrier_rad_per_fs.unwrap_or(idler);
                if !carrier.is_finite() {
                    return Err(invalid("sample.carrier_rad_per_fs", "must be finite"));
                }
                Bilayer::new(*r0, *r1, *thickness_um, *index, carrier).map(SampleModel::Bilayer).map_err(sample_err)
            }
            SampleSection::GlassSlab { thickness_um, ambient_index, layer_index, substrate_index } => {
                Bilayer::from_fresnel(*ambient_index, *layer_index, *substrate_index, *thickness_um, idler)
                    .map(SampleModel::Bilayer)
                    .map_err(sample_err)
            }
            SampleSection::Tabulated { table } => {
                let rows = table.iter().map(|r| (r[0], Complex64::new(r[1], r[2]))).collect();
                SampleModel::tabulated(rows).map_err(sample_err)
            }
        }
    }

    fn check_scan(&self) -> Result<(), SimError> {
        let s = &self.scan;
        match (s.start_um, s.stop_um) {
            (Some(a), Some(b)) => {
                if !(a.is_finite() && b.is_finite() && b > a) {
                    return Err(invalid("scan.stop_um", format!("need finite start_um < stop_um, got {a} and {b}")));
                }
            }
            (None, None) => {}
            _ => return Err(invalid("scan", "start_um and stop_um must be given together")),
        }
        if let Some(n) = s.points {
            if n < 2 {
                return Err(invalid("scan.points", "at least two points required"));
            }
        }
        Ok(())
    }

    fn build_grid(&self, kernel: Kernel, crystal: &Crystal, pump: &Pump) -> Result<Grid, SimError> {
        // the Gaussian kernel has no walk-off term, so its ridge is untilted
        let sized = match kernel {
            Kernel::Gaussian => crystal.without_walk_off(),
            Kernel::Exact => *crystal,
        };
        let points = match self.grid.points {
            Some(n) => n,
            None => suggest_grid_points(&sized, pump, DEFAULT_GRID_FLOOR)
                .ok_or_else(|| invalid("grid.points", "no grid up to 16384 points resolves this crystal and pump"))?,
        };
        make_frequency_grid(&sized, pump, points).map_err(|e| invalid("grid.points", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "tasks = [\"g1_scan\"]\n[crystal]\nlength_mm = 5.0\n[pump]\nduration_ps = 2.0\n";

    #[test]
    fn minimal_file_takes_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.crystal.preset, "mgo-ln");
        assert_eq!(s.sample, SampleSection::Mirror);
        assert_eq!(s.output.format, Format::Csv);
        let setup = s.setup().unwrap();
        assert!(setup.geometry.is_synchronized(&setup.crystal));
        assert!(setup.grid.is_none());
        assert_eq!(setup.pump.duration(), 2000.0);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_scenario(&format!("{MINIMAL}colour = 3\n")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
        let err = parse_scenario(&MINIMAL.replace("length_mm", "lenght_mm")).unwrap_err();
        assert!(err.to_string().contains("lenght_mm"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_scenario("tasks = [\"g1_scan\"]\n[crystal\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn reflectivity_bound_names_field() {
        let text =
            format!("{MINIMAL}[sample]\nkind = \"bilayer\"\nr0 = 0.6\nr1 = 0.5\nthickness_um = 20.0\nindex = 1.5\n");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("sample.r1"), "{err}");
    }

    #[test]
    fn crystal_errors_use_scenario_keys() {
        let err = parse_scenario(&MINIMAL.replace("length_mm = 5.0", "length_mm = 5.0\ngv_mismatch_fs_per_mm = 0.0"))
            .unwrap_err();
        assert!(err.to_string().contains("crystal.gv_mismatch_fs_per_mm"), "{err}");
        let err = parse_scenario(&MINIMAL.replace("5.0", "-1.0")).unwrap_err();
        assert!(err.to_string().contains("crystal.length_mm"), "{err}");
    }

    #[test]
    fn pump_needs_exactly_one_duration() {
        let err = parse_scenario(&format!("{MINIMAL}duration_fs = 100.0\n")).unwrap_err();
        assert!(err.to_string().starts_with("validation error: pump:"), "{err}");
        let s = parse_scenario(&MINIMAL.replace("duration_ps = 2.0", "gamma = 1.0")).unwrap();
        let setup = s.setup().unwrap();
        assert!((nlint_core::optics::gamma_param(&setup.crystal, &setup.pump) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn task_list_is_checked() {
        assert!(parse_scenario(&MINIMAL.replace("[\"g1_scan\"]", "[]")).is_err());
        assert!(parse_scenario(&MINIMAL.replace("[\"g1_scan\"]", "[\"g1_scan\", \"g1_scan\"]")).is_err());
        assert!(parse_scenario(&MINIMAL.replace("g1_scan", "g2_scan")).is_err());
    }

    #[test]
    fn glass_slab_defaults() {
        let text = format!("{MINIMAL}[sample]\nkind = \"glass-slab\"\n");
        let setup = parse_scenario(&text).unwrap().setup().unwrap();
        match setup.sample {
            SampleModel::Bilayer(b) => {
                assert!((b.r0 + 0.2).abs() < 1e-12);
                assert!((b.optical_thickness_um() - 60.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coarse_grid_is_a_validation_error() {
        let text = MINIMAL
            .replace("[\"g1_scan\"]", "[\"spectrum\"]")
            .replace("length_mm = 5.0", "length_mm = 10.0")
            .replace("duration_ps = 2.0", "duration_fs = 100.0");
        let auto = parse_scenario(&text).unwrap().setup().unwrap();
        assert_eq!(auto.grid.unwrap().len(), 1024);
        let err = parse_scenario(&format!("{text}[grid]\npoints = 512\n")).unwrap_err();
        assert!(err.to_string().contains("grid.points"), "{err}");
    }

    #[test]
    fn render_round_trips() {
        let text = format!(
            "{MINIMAL}[sample]\nkind = \"tabulated\"\ntable = [[-1.0, 0.5, 0.0], [1.0, 0.0, 0.5]]\n[scan]\nstart_um = -10.0\nstop_um = 10.0\n"
        );
        let s = parse_scenario(&text).unwrap();
        let again = parse_scenario(&s.render()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.digest(), again.digest());
        assert_eq!(s.digest().len(), 64);
    }
}
