//! Plain-text run configuration: `[section]` headers and `key = value` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::analysis::Window;
use crate::error::{Error, Result};
use crate::geometry::{build_geometry, ResonatorGeometry};
use crate::gtd::WaveNumber;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Frequency,
    Distance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub radius_cm: f64,
    pub alpha_deg: f64,
    pub separation_cm: f64,
    pub antenna_offset_cm: f64,

    pub nodes_per_wavelength: f64,
    pub grid_h_cm: f64,
    pub coupling_kappa: f64,

    pub kind: SweepAxis,
    pub f_min_ghz: f64,
    pub f_max_ghz: f64,
    pub d_min_cm: f64,
    pub d_max_cm: f64,
    pub samples: usize,
    pub frequency_ghz: f64,

    pub directory: String,
    pub formats: String,

    pub prominence: f64,
    pub classify_tolerance_wavelengths: f64,
    pub l_max_over_r: f64,
    pub geometric_l_max_over_r: f64,
    pub window: Window,
    pub zero_pad: usize,
    pub return_l_max_over_r: f64,
    pub return_source: String,
    pub sphere_radius_cm: f64,
    pub source_exclusion_cm: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            radius_cm: 30.5,
            alpha_deg: 106.0,
            separation_cm: 33.0,
            antenna_offset_cm: 0.2,
            nodes_per_wavelength: 20.0,
            grid_h_cm: 0.5,
            coupling_kappa: 1.0,
            kind: SweepAxis::Distance,
            f_min_ghz: 3.0,
            f_max_ghz: 9.0,
            d_min_cm: 22.5,
            d_max_cm: 42.5,
            samples: 401,
            frequency_ghz: 5.63,
            directory: "out".into(),
            formats: "csv".into(),
            prominence: 0.005,
            classify_tolerance_wavelengths: 0.1,
            l_max_over_r: 8.0,
            geometric_l_max_over_r: 60.0,
            window: Window::Hann,
            zero_pad: 16,
            return_l_max_over_r: 10.0,
            return_source: "quantum".into(),
            sphere_radius_cm: 0.3,
            source_exclusion_cm: 1.0,
        }
    }
}

/// Every accepted `section.key`.
pub const KEYS: &[&str] = &[
    "geometry.radius_cm",
    "geometry.alpha_deg",
    "geometry.separation_cm",
    "geometry.antenna_offset_cm",
    "solver.nodes_per_wavelength",
    "solver.grid_h_cm",
    "solver.coupling_kappa",
    "sweep.kind",
    "sweep.f_min_ghz",
    "sweep.f_max_ghz",
    "sweep.d_min_cm",
    "sweep.d_max_cm",
    "sweep.samples",
    "sweep.frequency_ghz",
    "output.directory",
    "output.formats",
    "analysis.prominence",
    "analysis.classify_tolerance_wavelengths",
    "analysis.l_max_over_r",
    "analysis.geometric_l_max_over_r",
    "analysis.window",
    "analysis.zero_pad",
    "analysis.return_l_max_over_r",
    "analysis.return_source",
    "analysis.sphere_radius_cm",
    "analysis.source_exclusion_cm",
];

fn unknown(key: &str) -> Error {
    Error::config(key, format!("unknown key; valid keys are: {}", KEYS.join(", ")))
}

fn num(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(key, format!("expected a number, got `{v}`")))
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x = num(key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::config(key, format!("must be positive, got {x}")))
    }
}

impl RunConfig {
    /// Applies one `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "geometry.radius_cm" => self.radius_cm = positive(key, v)?,
            "geometry.alpha_deg" => self.alpha_deg = positive(key, v)?,
            "geometry.separation_cm" => self.separation_cm = positive(key, v)?,
            "geometry.antenna_offset_cm" => self.antenna_offset_cm = positive(key, v)?,
            "solver.nodes_per_wavelength" => self.nodes_per_wavelength = positive(key, v)?,
            "solver.grid_h_cm" => self.grid_h_cm = positive(key, v)?,
            "solver.coupling_kappa" => self.coupling_kappa = positive(key, v)?,
            "sweep.kind" => {
                self.kind = match v {
                    "frequency" => SweepAxis::Frequency,
                    "distance" => SweepAxis::Distance,
                    _ => return Err(Error::config(key, format!("expected `frequency` or `distance`, got `{v}`"))),
                }
            }
            "sweep.f_min_ghz" => self.f_min_ghz = positive(key, v)?,
            "sweep.f_max_ghz" => self.f_max_ghz = positive(key, v)?,
            "sweep.d_min_cm" => self.d_min_cm = positive(key, v)?,
            "sweep.d_max_cm" => self.d_max_cm = positive(key, v)?,
            "sweep.samples" => {
                self.samples = v
                    .parse()
                    .map_err(|_| Error::config(key, format!("expected an integer, got `{v}`")))?
            }
            "sweep.frequency_ghz" => self.frequency_ghz = positive(key, v)?,
            "output.directory" => {
                if v.is_empty() {
                    return Err(Error::config(key, "must not be empty"));
                }
                self.directory = v.to_string()
            }
            "output.formats" => {
                if v != "csv" {
                    return Err(Error::config(key, format!("only `csv` is supported, got `{v}`")));
                }
                self.formats = v.to_string()
            }
            "analysis.prominence" => self.prominence = positive(key, v)?,
            "analysis.classify_tolerance_wavelengths" => self.classify_tolerance_wavelengths = positive(key, v)?,
            "analysis.l_max_over_r" => self.l_max_over_r = positive(key, v)?,
            "analysis.geometric_l_max_over_r" => self.geometric_l_max_over_r = positive(key, v)?,
            "analysis.window" => self.window = Window::parse(v)?,
            "analysis.zero_pad" => {
                self.zero_pad = v
                    .parse()
                    .ok()
                    .filter(|p| *p >= 1)
                    .ok_or_else(|| Error::config(key, format!("expected an integer >= 1, got `{v}`")))?
            }
            "analysis.return_l_max_over_r" => self.return_l_max_over_r = positive(key, v)?,
            "analysis.return_source" => {
                if v != "quantum" && v != "semiclassical" {
                    return Err(Error::config(key, format!("expected `quantum` or `semiclassical`, got `{v}`")));
                }
                self.return_source = v.to_string()
            }
            "analysis.sphere_radius_cm" => self.sphere_radius_cm = positive(key, v)?,
            "analysis.source_exclusion_cm" => {
                let x = num(key, v)?;
                if x < 0.0 {
                    return Err(Error::config(key, "must not be negative"));
                }
                self.source_exclusion_cm = x
            }
            _ => return Err(unknown(key)),
        }
        Ok(())
    }

    /// Parses configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "unterminated section header"))?;
                section = name.trim().to_string();
                if !["geometry", "solver", "sweep", "output", "analysis"].contains(&section.as_str()) {
                    return Err(Error::config(
                        format!("[{section}]"),
                        "unknown section; valid sections are: geometry, solver, sweep, output, analysis",
                    ));
                }
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`")))?;
            if section.is_empty() {
                return Err(Error::config(k.trim(), "key outside of a section"));
            }
            self.set(&format!("{section}.{}", k.trim()), v)?;
        }
        Ok(())
    }

    /// Applies a `--set section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "override must look like section.key=value"))?;
        self.set(k.trim(), v)
    }

    /// Cross-field checks.
    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        if self.samples < 2 {
            return Err(Error::config("sweep.samples", format!("need at least 2, got {}", self.samples)));
        }
        if self.f_max_ghz <= self.f_min_ghz {
            return Err(Error::config("sweep.f_max_ghz", "must exceed sweep.f_min_ghz"));
        }
        if self.d_max_cm <= self.d_min_cm {
            return Err(Error::config("sweep.d_max_cm", "must exceed sweep.d_min_cm"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ResonatorGeometry> {
        build_geometry(self.radius_cm, self.alpha_deg, self.separation_cm, self.antenna_offset_cm)
    }

    pub fn wave_number(&self) -> Result<WaveNumber> {
        WaveNumber::from_ghz(self.frequency_ghz)
    }

    /// Resolved configuration as `# section.key = value` lines.
    pub fn header(&self, command: &str) -> String {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        m.insert("geometry.radius_cm", self.radius_cm.to_string());
        m.insert("geometry.alpha_deg", self.alpha_deg.to_string());
        m.insert("geometry.separation_cm", self.separation_cm.to_string());
        m.insert("geometry.antenna_offset_cm", self.antenna_offset_cm.to_string());
        m.insert("solver.nodes_per_wavelength", self.nodes_per_wavelength.to_string());
        m.insert("solver.grid_h_cm", self.grid_h_cm.to_string());
        m.insert("solver.coupling_kappa", self.coupling_kappa.to_string());
        m.insert(
            "sweep.kind",
            match self.kind {
                SweepAxis::Frequency => "frequency",
                SweepAxis::Distance => "distance",
            }
            .into(),
        );
        m.insert("sweep.f_min_ghz", self.f_min_ghz.to_string());
        m.insert("sweep.f_max_ghz", self.f_max_ghz.to_string());
        m.insert("sweep.d_min_cm", self.d_min_cm.to_string());
        m.insert("sweep.d_max_cm", self.d_max_cm.to_string());
        m.insert("sweep.samples", self.samples.to_string());
        m.insert("sweep.frequency_ghz", self.frequency_ghz.to_string());
        m.insert("output.directory", self.directory.clone());
        m.insert("output.formats", self.formats.clone());
        m.insert("analysis.prominence", self.prominence.to_string());
        m.insert(
            "analysis.classify_tolerance_wavelengths",
            self.classify_tolerance_wavelengths.to_string(),
        );
        m.insert("analysis.l_max_over_r", self.l_max_over_r.to_string());
        m.insert("analysis.geometric_l_max_over_r", self.geometric_l_max_over_r.to_string());
        m.insert("analysis.window", self.window.name().into());
        m.insert("analysis.zero_pad", self.zero_pad.to_string());
        m.insert("analysis.return_l_max_over_r", self.return_l_max_over_r.to_string());
        m.insert("analysis.return_source", self.return_source.clone());
        m.insert("analysis.sphere_radius_cm", self.sphere_radius_cm.to_string());
        m.insert("analysis.source_exclusion_cm", self.source_exclusion_cm.to_string());
        debug_assert_eq!(m.len(), KEYS.len());
        let mut s = format!("# command = {command}\n");
        for (k, v) in m {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}
