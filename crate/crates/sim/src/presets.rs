//! Built-in scenarios reproducing the published figures.

use crate::scenario::{
    CrystalSection, GeometrySection, GridSection, KernelChoice, OutputSection, PumpSection, SampleSection, ScanSection,
    Scenario, Task,
};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub scenario: Scenario,
}

/// Crystal presets accepted by `crystal.preset`.
pub const CRYSTALS: [(&str, &str); 1] =
    [("mgo-ln", "MgO:LiNbO3, 532 -> 810 + 1550 nm, D = -263.50 fs/mm, D+ = 780 fs/mm")];

/// Sample kinds accepted by `sample.kind`.
pub const SAMPLES: [(&str, &str); 5] = [
    ("mirror", "r = 1 at every frequency"),
    ("uniform", "constant complex r = [re, im]"),
    ("bilayer", "r0 + r1 exp(i w tau), tau = 2 d n / c"),
    ("glass-slab", "20 um slab, n = 1.5, between air and water"),
    ("tabulated", "rows of [detuning, re, im], linear interpolation"),
];

fn pump_fs(t0: f64) -> PumpSection {
    PumpSection { duration_fs: Some(t0), ..PumpSection::default() }
}

fn pump_ps(t0: f64) -> PumpSection {
    PumpSection { duration_ps: Some(t0), ..PumpSection::default() }
}

fn base(name: &str, description: &str, tasks: Vec<Task>, crystal: CrystalSection, pump: PumpSection) -> Scenario {
    Scenario {
        name: Some(name.to_string()),
        description: Some(description.to_string()),
        tasks,
        crystal,
        pump,
        geometry: GeometrySection::default(),
        sample: SampleSection::Mirror,
        grid: GridSection::default(),
        scan: ScanSection::default(),
        output: OutputSection { dir: Some(format!("out/{name}")), ..OutputSection::default() },
    }
}

/// +-1.2 c |D| L for the 5 mm crystal, 201 points.
fn coherence_scan() -> ScanSection {
    ScanSection { start_um: Some(-480.0), stop_um: Some(480.0), points: Some(201), fringes: false }
}

fn fig2(name: &str, pump: PumpSection, label: &str) -> Scenario {
    let mut s = base(
        name,
        &format!("|g1| versus path delay, L = 5 mm, {label}, mirror, synchronized pump"),
        vec![Task::G1Scan],
        CrystalSection::preset("mgo-ln", 5.0),
        pump,
    );
    s.scan = coherence_scan();
    s
}

fn fig3(name: &str, pump: PumpSection, label: &str) -> Scenario {
    let mut s = base(
        name,
        &format!("Gaussian-kernel joint spectrum and |g1|, L = 5 mm, {label}"),
        vec![Task::JointSpectrum, Task::G1Scan],
        CrystalSection::preset("mgo-ln", 5.0),
        pump,
    );
    s.grid.kernel = KernelChoice::Gaussian;
    s.scan.points = Some(201);
    s
}

fn fig4(name: &str, length_mm: f64, pump: PumpSection, label: &str) -> Scenario {
    let mut s = base(
        name,
        &format!("OCT scan of a 20 um glass slab, L = {length_mm} mm, {label}"),
        vec![Task::Spectrum, Task::OctScan],
        CrystalSection::preset("mgo-ln", length_mm),
        pump,
    );
    s.sample = SampleSection::glass_slab();
    s
}

pub fn presets() -> Vec<Preset> {
    let separable = {
        let mut s = base(
            "separable",
            "Schmidt decomposition at the separability point, L = 5 mm, gamma = 1",
            vec![Task::Schmidt, Task::Spectrum],
            CrystalSection::preset("mgo-ln", 5.0),
            pump_fs(212.0),
        );
        s.grid.kernel = KernelChoice::Gaussian;
        s
    };
    vec![
        Preset {
            name: "fig2a",
            summary: "g1 scan, T0 = 100 ps (triangular envelope)",
            scenario: fig2("fig2a", pump_ps(100.0), "T0 = 100 ps"),
        },
        Preset {
            name: "fig2b",
            summary: "g1 scan, T0 = 2 ps (mixed envelope)",
            scenario: fig2("fig2b", pump_ps(2.0), "T0 = 2 ps"),
        },
        Preset {
            name: "fig2c",
            summary: "g1 scan, T0 = 100 fs (Gaussian envelope)",
            scenario: fig2("fig2c", pump_fs(100.0), "T0 = 100 fs"),
        },
        Preset {
            name: "fig3a",
            summary: "joint spectrum + g1, T0 = 100 ps (anti-correlated)",
            scenario: fig3("fig3a", pump_ps(100.0), "T0 = 100 ps"),
        },
        Preset {
            name: "fig3b",
            summary: "joint spectrum + g1, T0 = 212 fs (separable)",
            scenario: fig3("fig3b", pump_fs(212.0), "T0 = 212 fs"),
        },
        Preset {
            name: "fig3c",
            summary: "joint spectrum + g1, T0 = 10 fs (correlated)",
            scenario: fig3("fig3c", pump_fs(10.0), "T0 = 10 fs"),
        },
        Preset {
            name: "fig4a",
            summary: "glass slab, L = 0.5 mm, T0 = 100 ps (peaks 60 um apart)",
            scenario: fig4("fig4a", 0.5, pump_ps(100.0), "T0 = 100 ps"),
        },
        Preset {
            name: "fig4b",
            summary: "glass slab, L = 10 mm, T0 = 100 ps (unresolved)",
            scenario: fig4("fig4b", 10.0, pump_ps(100.0), "T0 = 100 ps"),
        },
        Preset {
            name: "fig4c",
            summary: "glass slab, L = 10 mm, T0 = 100 fs (peaks 42 um apart)",
            scenario: fig4("fig4c", 10.0, pump_fs(100.0), "T0 = 100 fs"),
        },
        Preset { name: "separable", summary: "Schmidt number at gamma = 1", scenario: separable },
    ]
}

pub fn find(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}
