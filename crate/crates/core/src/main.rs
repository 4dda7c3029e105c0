//! Command-line front end: sweep execution, plotting, and config self-checks.

use clap::{Parser, Subcommand};
use gfdm_link::channel::PowerDelayProfile;
use gfdm_link::config::RunConfig;
use gfdm_link::link::Qpsk;
use gfdm_link::modem::{FilterSpec, TransmitterMatrix};
use gfdm_link::numerics::{ComplexMatrix, Dft};
use gfdm_link::pilot::{reference_sequence, FrequencyBinSet, PilotPlacement, PilotScheme};
use gfdm_link::plot::{render_svg, Metric};
use gfdm_link::sim::{monte_carlo, write_csv, ExperimentSpec, SchemeContext, SchemeSelect};
use gfdm_link::{Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "gfdm-link",
    about = "GFDM link simulation: pilot-aided channel estimation sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep described by a config file; writes CSV.
    Run {
        /// Flat key=value config file.
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output CSV path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a result CSV as an SVG line chart with a logarithmic y axis.
    Plot {
        /// Result CSV produced by `run`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
        /// Column to plot: mse or ser.
        #[arg(long)]
        metric: Metric,
    },
    /// Check the configured geometry's invariants and exit nonzero on failure.
    Validate {
        /// Flat key=value config file.
        #[arg(long)]
        config: PathBuf,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)
        .map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))
}

fn cmd_run(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = RunConfig::parse(&read_to_string(config)?)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.out_path = out.display().to_string();
    }
    let spec = cfg.experiment()?;
    let points = monte_carlo(&spec)?;
    write_output(Path::new(&cfg.out_path), &write_csv(&points))?;
    eprintln!("wrote {} curve points to {}", points.len(), cfg.out_path);
    Ok(())
}

fn cmd_plot(input: &Path, out: &Path, metric: Metric) -> Result<()> {
    let svg = render_svg(&read_to_string(input)?, metric)?;
    write_output(out, &svg)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

/// Smoke checks of the configured geometry: transmitter unitarity where the
/// filter promises it, the precancellation identity when a precancelling
/// scheme is selected, and the analytic interference covariance against a
/// short empirical estimate for the first estimator-based scheme.
fn cmd_validate(config: &Path) -> Result<()> {
    let cfg = RunConfig::parse(&read_to_string(config)?)?;
    let spec = cfg.experiment()?;
    let mut failures = 0usize;
    let mut check = |name: &str, outcome: std::result::Result<String, String>| match outcome {
        Ok(detail) => println!("ok   {name}: {detail}"),
        Err(detail) => {
            failures += 1;
            println!("FAIL {name}: {detail}");
        }
    };

    let gfdm = spec.gfdm();
    let tx = TransmitterMatrix::from_config(gfdm).map_err(|e| Error::Numerical(e.to_string()))?;

    // AᴴA = I holds for the flat prototype; other filters are reported only
    let gram = tx.matrix().hermitian().gram();
    let dev = gram.sub(&ComplexMatrix::identity(gfdm.d())).frobenius_norm();
    match gfdm.filter() {
        FilterSpec::Dirichlet => check(
            "unitarity",
            if dev <= 1e-9 {
                Ok(format!("deviation {dev:.2e}"))
            } else {
                Err(format!("deviation {dev:.2e} exceeds 1e-9"))
            },
        ),
        _ => println!("info unitarity: deviation {dev:.2e} (not expected of this filter)"),
    }

    let wants_precancel = spec
        .schemes()
        .iter()
        .any(|s| matches!(s, SchemeSelect::Proposed | SchemeSelect::Ls));
    if wants_precancel {
        check("precancellation", precancel_check(&spec, &tx));
    } else {
        println!("skip precancellation: no precancelling scheme selected");
    }

    let estimator_scheme = spec.schemes().iter().copied().find(|s| {
        matches!(s, SchemeSelect::Conventional | SchemeSelect::Proposed | SchemeSelect::Ofdm)
    });
    match estimator_scheme {
        Some(select) => check("covariance", covariance_check(&spec, select)),
        None => println!("skip covariance: no estimator-based scheme selected"),
    }

    if failures > 0 {
        Err(Error::Numerical(format!("{failures} validation check(s) failed")))
    } else {
        println!("all checks passed");
        Ok(())
    }
}

fn precancel_check(
    spec: &ExperimentSpec,
    tx: &TransmitterMatrix,
) -> std::result::Result<String, String> {
    let gfdm = spec.gfdm();
    let (k, m) = (gfdm.k(), gfdm.m());
    let d_r = reference_sequence(k, spec.es(), spec.seed()).map_err(|e| e.to_string())?;
    let placement = PilotPlacement::default_for(k, m).map_err(|e| e.to_string())?;
    let bins = FrequencyBinSet::default_for(k, m).map_err(|e| e.to_string())?;
    let scheme = PilotScheme::proposed(tx, placement, bins, d_r).map_err(|e| e.to_string())?;
    let dft = Dft::new(gfdm.d()).map_err(|e| e.to_string())?;
    let qpsk = Qpsk::new(spec.es()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed() ^ 0x5ca1e);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let d_d: Vec<Complex64> =
            (0..gfdm.d() - k).map(|_| qpsk.symbol(qpsk.draw(&mut rng))).collect();
        let (block, _) = scheme.generate_block(&d_d).map_err(|e| e.to_string())?;
        let x_f = dft.apply(&tx.modulate(&block).map_err(|e| e.to_string())?);
        let err: f64 = scheme
            .bins()
            .bins()
            .iter()
            .zip(scheme.d_r())
            .map(|(&b, r)| (x_f[b] - r).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err);
    }
    if worst <= 1e-9 {
        Ok(format!("worst residual {worst:.2e} over 10 blocks"))
    } else {
        Err(format!("residual {worst:.2e} exceeds 1e-9"))
    }
}

fn covariance_check(
    spec: &ExperimentSpec,
    select: SchemeSelect,
) -> std::result::Result<String, String> {
    let samples = 5000usize;
    let tolerance = 0.15;
    let ctx = SchemeContext::build(spec, select, spec.seed()).map_err(|e| e.to_string())?;
    let pdp = PowerDelayProfile::exponential(spec.n_taps()).map_err(|e| e.to_string())?;
    let analytic = match ctx.estimator_parts(&pdp, spec.es()).map_err(|e| e.to_string())? {
        Some((_, sigma)) => sigma,
        None => return Err("scheme has no interference covariance".into()),
    };

    let scheme = ctx.scheme();
    let d = scheme.d();
    let data_len = d - scheme.p();
    let qpsk = Qpsk::new(spec.es()).map_err(|e| e.to_string())?;
    // the interference term is diag(W·A·T·d_d)·F·h; T·d_d is the generated
    // block minus its payload-independent pilot part
    let pilot_part = scheme.pilot_component();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed() ^ 0xc0f);
    let mut acc = ComplexMatrix::zeros(d, d);
    let batch = 32usize;
    let zero_col = vec![Complex64::new(0.0, 0.0); d];
    let mut sample = ComplexMatrix::zeros(d, batch);
    let mut done = 0usize;
    while done < samples {
        let take = batch.min(samples - done);
        for col in 0..take {
            let d_d: Vec<Complex64> =
                (0..data_len).map(|_| qpsk.symbol(qpsk.draw(&mut rng))).collect();
            let (block, _) = scheme.generate_block(&d_d).map_err(|e| e.to_string())?;
            let data_part: Vec<Complex64> =
                block.iter().zip(&pilot_part).map(|(b, p)| b - p).collect();
            let image = ctx
                .dft()
                .apply(&ctx.tx().modulate(&data_part).map_err(|e| e.to_string())?);
            let h = pdp.draw(&mut rng);
            let spectrum = h.spectrum(ctx.dft());
            let column: Vec<Complex64> =
                image.iter().zip(&spectrum).map(|(a, b)| a * b).collect();
            sample.set_column(col, &column);
        }
        for col in take..batch {
            sample.set_column(col, &zero_col);
        }
        sample.gram_accumulate(&mut acc);
        done += take;
    }
    acc.mirror_upper();
    let empirical = acc.scale(Complex64::new(1.0 / samples as f64, 0.0));
    let rel = empirical.sub(&analytic).frobenius_norm() / analytic.frobenius_norm();
    if rel <= tolerance {
        Ok(format!(
            "{select}: {:.1}% relative deviation over {samples} samples",
            rel * 100.0
        ))
    } else {
        Err(format!(
            "{select}: {:.1}% relative deviation exceeds {:.0}%",
            rel * 100.0,
            tolerance * 100.0
        ))
    }
}

fn main() {
    // flag/usage mistakes are configuration errors, not numerical failures
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let code = match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
            _ => 1,
        };
        let _ = e.print();
        std::process::exit(code);
    });
    let outcome = match &cli.command {
        Command::Run { config, seed, out } => cmd_run(config, *seed, out.clone()),
        Command::Plot { input, out, metric } => cmd_plot(input, out, *metric),
        Command::Validate { config } => cmd_validate(config),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        let code = match e {
            Error::Config(_) => 1,
            _ => 2,
        };
        std::process::exit(code);
    }
}
