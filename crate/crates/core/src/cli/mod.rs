//! Command-line entry point: configuration, subcommands and artifact output.

mod config;
mod validate;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{error, info};

pub use config::{RunConfig, SweepAxis, KEYS};
pub use validate::{circle_check, fourier_check, monodromy_check, run_all, OracleCheck};

use crate::analysis::{
    distance_study, frequency_study, label_mode, label_stable_peaks, peaks_csv, return_spectrum, slater_shift_map,
    SemiclassicalSettings, Study, StudySettings, WaveSettings,
};
use crate::error::{Error, Result};
use crate::gtd::{semiclassical_csv, OrbitSelection, WaveNumber};
use crate::helmholtz::{field_grid, nodes_for, solve_arc_density, ComplexSpectrum, FieldMap, Grid, Quantity};
use crate::raytrace::{build_orbit_catalog, catalog_to_csv};

/// Trailing line written last into every artifact.
pub const COMPLETION_MARKER: &str = "# complete";

#[derive(Debug, Parser)]
#[command(name = "arcbilliard", version, about = "Wall-plus-arc microwave billiard laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file with [geometry], [solver], [sweep], [output] and [analysis] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one value, e.g. `--set geometry.alpha_deg=115`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Worker threads for sweeps and field maps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Full-wave |T|^2 over frequency at fixed geometry, with classified peaks.
    SweepFreq,
    /// Full-wave |T|^2 over wall-reflector separation at fixed frequency.
    SweepDist,
    /// Field maps at `geometry.separation_cm` and `sweep.frequency_ghz`.
    Wavefunction,
    /// Fourier transform of S11(k) onto orbit length.
    ReturnSpectrum,
    /// Closed-orbit table.
    Orbits,
    /// Bead-perturbation shift map at `geometry.separation_cm` and `sweep.frequency_ghz`.
    ShiftMap,
    /// Built-in oracle suite.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SweepFreq => "sweep-freq",
            Command::SweepDist => "sweep-dist",
            Command::Wavefunction => "wavefunction",
            Command::ReturnSpectrum => "return-spectrum",
            Command::Orbits => "orbits",
            Command::ShiftMap => "shift-map",
            Command::Validate => "validate",
        }
    }
}

/// Exit status for an error: 2 for configuration problems, 3 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        3
    }
}

/// Writes `header`, `body` and the completion marker to `dir/name` via a
/// temporary file renamed into place.
pub fn write_artifact(dir: &Path, name: &str, header: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let partial = dir.join(format!("{name}.partial"));
    {
        let mut f = fs::File::create(&partial)?;
        f.write_all(header.as_bytes())?;
        f.write_all(body.as_bytes())?;
        if !body.ends_with('\n') && !body.is_empty() {
            f.write_all(b"\n")?;
        }
        f.write_all(COMPLETION_MARKER.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
    }
    fs::rename(&partial, &target)?;
    info!("wrote {}", target.display());
    Ok(target)
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(out) = &cli.out {
        cfg.directory = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn study_settings(cfg: &RunConfig) -> StudySettings {
    StudySettings {
        wave: WaveSettings {
            nodes_per_wavelength: cfg.nodes_per_wavelength,
            kappa: cfg.coupling_kappa,
        },
        semiclassical: semiclassical_settings(cfg),
        prominence: cfg.prominence,
        tolerance_wavelengths: cfg.classify_tolerance_wavelengths,
    }
}

fn semiclassical_settings(cfg: &RunConfig) -> SemiclassicalSettings {
    SemiclassicalSettings::for_radius(cfg.radius_cm, cfg.l_max_over_r, cfg.geometric_l_max_over_r, cfg.coupling_kappa)
}

fn check_unitarity(spec: &ComplexSpectrum) -> Result<()> {
    let m = spec.max_abs_s11();
    if m > 1.0 + 1e-9 {
        return Err(Error::Numerical(format!("|S11| = {m} exceeds 1")));
    }
    Ok(())
}

fn write_study(dir: &Path, header: &str, stem: &str, study: &Study) -> Result<()> {
    write_artifact(dir, &format!("{stem}.csv"), header, &study.quantum.to_csv())?;
    write_artifact(dir, &format!("peaks_{stem}.csv"), header, &peaks_csv(&study.peaks))?;
    if let (Some(w), Some(wo)) = (&study.with_diffraction, &study.without_diffraction) {
        write_artifact(dir, &format!("{stem}_semiclassical.csv"), header, &w.to_csv())?;
        write_artifact(dir, &format!("{stem}_no_diffraction.csv"), header, &wo.to_csv())?;
    }
    Ok(())
}

fn solve_field(cfg: &RunConfig) -> Result<(crate::geometry::ResonatorGeometry, FieldMap)> {
    let geom = cfg.geometry()?;
    let k = cfg.wave_number()?.k();
    let sol = solve_arc_density(&geom, k, nodes_for(&geom, k, cfg.nodes_per_wavelength))?;
    let map = field_grid(&sol, Grid::for_geometry(&geom, cfg.grid_h_cm)?)?;
    Ok((geom, map))
}

/// Runs one subcommand with a resolved configuration.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = PathBuf::from(&cfg.directory);
    let mut header = cfg.header(command.name());
    let mut written = Vec::new();
    match command {
        Command::SweepFreq => {
            let geom = cfg.geometry()?;
            let (k0, k1) = (WaveNumber::from_ghz(cfg.f_min_ghz)?.k(), WaveNumber::from_ghz(cfg.f_max_ghz)?.k());
            header.push_str("# axis = wave number k in 1/cm\n");
            let study = frequency_study(&geom, k0, k1, cfg.samples, &study_settings(cfg))?;
            check_unitarity(&study.quantum)?;
            write_study(&dir, &header, "sweep_freq", &study)?;
            written.push(dir.join("sweep_freq.csv"));
        }
        Command::SweepDist => {
            let geom = cfg.geometry()?;
            let wk = cfg.wave_number()?;
            header.push_str(&format!("# axis = separation D in cm\n# wavelength_cm = {}\n", wk.wavelength()));
            let s = study_settings(cfg);
            let mut study = distance_study(&geom, cfg.d_min_cm, cfg.d_max_cm, cfg.samples, wk.k(), &s)?;
            check_unitarity(&study.quantum)?;
            label_stable_peaks(&mut study, &geom, wk.k(), &s, cfg.grid_h_cm, cfg.source_exclusion_cm)?;
            write_study(&dir, &header, "sweep_dist", &study)?;
            written.push(dir.join("sweep_dist.csv"));
        }
        Command::Wavefunction => {
            let (geom, map) = solve_field(cfg)?;
            for q in Quantity::ALL {
                written.push(write_artifact(&dir, &format!("{}.txt", q.name()), &header, &map.matrix_text(q))?);
            }
            let lab = label_mode(&map, &geom, cfg.source_exclusion_cm);
            let body = format!(
                "n = {}\nm = {}\nambiguous = {}\nnear_arc_nodes = {}\n",
                lab.n, lab.m, lab.ambiguous, map.near_arc
            );
            written.push(write_artifact(&dir, "mode.txt", &header, &body)?);
        }
        Command::ReturnSpectrum => {
            let geom = cfg.geometry()?;
            let (k0, k1) = (WaveNumber::from_ghz(cfg.f_min_ghz)?.k(), WaveNumber::from_ghz(cfg.f_max_ghz)?.k());
            let spec = if cfg.return_source == "semiclassical" {
                let (spec, samples) = crate::analysis::semiclassical_sweep_frequency(
                    &geom,
                    k0,
                    k1,
                    cfg.samples,
                    &semiclassical_settings(cfg).with_selection(OrbitSelection::All),
                )?;
                written.push(write_artifact(&dir, "s11_semiclassical.csv", &header, &semiclassical_csv(&samples))?);
                spec
            } else {
                let spec = crate::analysis::sweep_frequency(
                    &geom,
                    k0,
                    k1,
                    cfg.samples,
                    &WaveSettings {
                        nodes_per_wavelength: cfg.nodes_per_wavelength,
                        kappa: cfg.coupling_kappa,
                    },
                )?;
                check_unitarity(&spec)?;
                written.push(write_artifact(&dir, "s11.csv", &header, &spec.to_csv())?);
                spec
            };
            let rs = return_spectrum(&spec, cfg.window, cfg.zero_pad, cfg.return_l_max_over_r)?;
            let h = format!("{header}# resolution_over_r = {}\n", rs.resolution);
            written.push(write_artifact(&dir, "return_spectrum.csv", &h, &rs.to_csv())?);
            let catalog = build_orbit_catalog(&geom, cfg.return_l_max_over_r * geom.radius());
            written.push(write_artifact(&dir, "orbits.csv", &header, &catalog_to_csv(&catalog, geom.radius()))?);
        }
        Command::Orbits => {
            let geom = cfg.geometry()?;
            let catalog = build_orbit_catalog(&geom, cfg.l_max_over_r * geom.radius());
            written.push(write_artifact(&dir, "orbits.csv", &header, &catalog_to_csv(&catalog, geom.radius()))?);
        }
        Command::ShiftMap => {
            let (geom, map) = solve_field(cfg)?;
            let sm = slater_shift_map(&map, cfg.sphere_radius_cm, geom.antenna(), cfg.source_exclusion_cm);
            written.push(write_artifact(&dir, "shift.txt", &header, &sm.matrix_text())?);
            written.push(write_artifact(&dir, "contour_mask.txt", &header, &sm.contour_text())?);
        }
        Command::Validate => {
            let checks = run_all()?;
            let mut body = String::new();
            for c in &checks {
                let line = format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                println!("{line}");
                body.push_str(&line);
                body.push('\n');
            }
            written.push(write_artifact(&dir, "validate.txt", &header, &body)?);
            if checks.iter().any(|c| !c.passed) {
                return Err(Error::Numerical("oracle checks failed".into()));
            }
        }
    }
    Ok(written)
}

/// Parses arguments, runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            error!("--workers must be at least 1");
            eprintln!("error: --workers must be at least 1");
            return 2;
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = load_config(&cli).and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
