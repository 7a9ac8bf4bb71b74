mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magorbits::chain::{chain_fermi_contours, solve_coefficients, ChainParams, ChainSpectrum};
use magorbits::model2::{derive_params, fermi_contours, DensityPair};
use magorbits::oscillations::{
    charge_trace, comb_fourier, transfer_trace, uniform_grid, SpectrumTrace, TraceKind, TraceSetup,
};
use magorbits::semiclassic::{charge_semiclassical, transfer_semiclassical};
use magorbits::validation::{run_validation, ValidationConfig};

use config::{Params, Settings};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser, Debug)]
#[command(name = "magorbits", version, about = "Landau-level oscillations of coupled magnetic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fermi contours of the classical energy sheets.
    Surface(SurfaceArgs),
    /// Overlap trace T(1/h), its semiclassical form and its spectrum.
    Overlap(Params),
    /// Fourier spectrum of the overlap or charge trace.
    Spectrum(SpectrumArgs),
    /// Charge-transfer trace Δρ(1/h), its semiclassical form and its spectrum.
    Charge(Params),
    /// Chain eigenproblem and coefficients as JSON.
    Chain(ChainArgs),
    /// Invariant suite; exits 1 if any check fails.
    Validate(Params),
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    #[command(flatten)]
    params: Params,
    /// Use the 2N+2 orbit chain instead of the orbit pair.
    #[arg(long)]
    chain: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Overlap,
    Charge,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    params: Params,
    #[arg(long, value_enum, default_value = "overlap")]
    kind: Kind,
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[command(flatten)]
    params: Params,
    /// Comma-separated per-orbital densities; all ones when absent.
    #[arg(long, value_delimiter = ',')]
    densities: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            eprintln!("magorbits: {}", msg.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("magorbits: error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Surface(a) => surface(&a.params.resolve()?, a.chain),
        Command::Overlap(p) => trace(&p.resolve()?, TraceKind::Overlap),
        Command::Charge(p) => trace(&p.resolve()?, TraceKind::Charge),
        Command::Spectrum(a) => {
            let kind = match a.kind {
                Kind::Overlap => TraceKind::Overlap,
                Kind::Charge => TraceKind::Charge,
            };
            spectrum(&a.params.resolve()?, kind)
        }
        Command::Chain(a) => chain(&a.params.resolve()?, &a.densities),
        Command::Validate(p) => validate(&p.resolve()?),
    }
    .map(|()| ExitCode::SUCCESS)
    .or_else(|e| match e.downcast::<ChecksFailed>() {
        Ok(_) => Ok(ExitCode::from(1)),
        Err(e) => Err(e),
    })
}

#[derive(Debug)]
struct ChecksFailed;

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("validation checks failed")
    }
}

impl std::error::Error for ChecksFailed {}

fn setup(s: &Settings) -> Result<TraceSetup> {
    let p = derive_params(s.g, s.xc, s.omega0, 1.0)?;
    Ok(TraceSetup::new(p, s.energy, s.gamma)?.with_densities(DensityPair::new(s.rho0, s.rho0_tilde)?))
}

fn surface(s: &Settings, use_chain: bool) -> Result<()> {
    let contours = if use_chain {
        let p = ChainParams::new(s.n, s.g, s.xc, s.omega0, s.h)?;
        chain_fermi_contours(&p, s.energy, None, s.exec())?
    } else {
        let p = derive_params(s.g, s.xc, s.omega0, s.h)?;
        fermi_contours(&p, s.energy, None, s.exec())?
    };
    output::write_contours(&s.output("surface", "", "csv"), &contours)
}

fn trace(s: &Settings, kind: TraceKind) -> Result<()> {
    let setup = setup(s)?;
    let grid = uniform_grid(s.inv_h_min, s.inv_h_max, s.samples)?;
    let exec = s.exec();
    let (exact, approx): (SpectrumTrace, SpectrumTrace) = match kind {
        TraceKind::Overlap => (transfer_trace(&setup, &grid, exec)?, transfer_semiclassical(&setup, &grid, exec)?),
        TraceKind::Charge => (charge_trace(&setup, &grid, exec)?, charge_semiclassical(&setup, &grid, exec)?),
    };
    let base = match kind {
        TraceKind::Overlap => "overlap",
        TraceKind::Charge => "charge",
    };
    output::write_trace(&s.output(base, "", "csv"), &exact)?;
    output::write_trace(&s.output(base, "_semiclassical", "csv"), &approx)?;
    let freqs = uniform_grid(s.f_min, s.f_max, s.f_samples)?;
    let spec = comb_fourier(&setup, kind, s.inv_h_max, &freqs, exec)?;
    output::write_spectrum(&s.output(base, "_spectrum", "csv"), &spec)?;
    output::write_peaks(&s.output(base, "_spectrum_peaks", "csv"), &spec)
}

fn spectrum(s: &Settings, kind: TraceKind) -> Result<()> {
    let setup = setup(s)?;
    let freqs = uniform_grid(s.f_min, s.f_max, s.f_samples)?;
    let spec = comb_fourier(&setup, kind, s.inv_h_max, &freqs, s.exec())?;
    output::write_spectrum(&s.output("spectrum", "", "csv"), &spec)?;
    output::write_peaks(&s.output("spectrum", "_peaks", "csv"), &spec)
}

fn chain(s: &Settings, densities: &[f64]) -> Result<()> {
    let p = ChainParams::new(s.n, s.g, s.xc, s.omega0, s.h)?;
    let spec = ChainSpectrum::of(&p)?;
    let targets = if densities.is_empty() {
        vec![1.0; p.orbits()]
    } else {
        densities.to_vec()
    };
    let c = solve_coefficients(&p, &spec, &targets, 0)?;
    output::write_chain(&s.output("chain", "", "json"), &p, &spec, &c)
}

fn validate(s: &Settings) -> Result<()> {
    let cfg = ValidationConfig {
        g: s.g,
        x_c: s.xc,
        energy: s.energy,
        gamma: s.gamma,
        h: s.h,
        densities: DensityPair::new(s.rho0, s.rho0_tilde)?,
        ..ValidationConfig::default()
    };
    let checks = run_validation(&cfg, s.exec());
    let report = output::validation_report(&checks);
    print!("{report}");
    if s.out.is_some() {
        std::fs::write(s.output("validate", "", "csv"), &report)?;
    }
    if checks.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(Box::new(ChecksFailed))
    }
}
