use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppsl::{
    cmd_characterize, cmd_compare, cmd_oracle, cmd_run, cmd_sweep_ratio, CharacterizeConfig,
    write_network_file, EngineChoice, EngineParams, ExperimentConfig, PolicyChoice,
};
use ppsl_core::{gen_fig3_network, gen_layered_random_bn, MtjMode};

#[derive(Parser)]
#[command(name = "ppsl", version, about = "Clocked and autonomous p-bit network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a network and write the histogram of the observed nodes.
    Run {
        #[arg(long, value_enum)]
        engine: Engine,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: ParamArgs,
        /// Also write the full spin trace.
        #[arg(long)]
        trace: bool,
    },
    /// Design-1 error against the exact marginal as tau_T / tau_N0 varies.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated tau_T / tau_N0 ratios.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        ratios: Vec<f64>,
    },
    /// Sigmoid, autocorrelation and step response of a single p-bit.
    Characterize {
        #[arg(long, value_enum)]
        engine: Engine,
        #[arg(long, env = "PPSL_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
              default_value = "-3,-2,-1,0,1,2,3")]
        inputs: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        ensembles: usize,
        /// Step-response window (default 20 tau_T for d1, 4 tau_N for d2).
        #[arg(long)]
        step_window: Option<f64>,
    },
    /// Exact marginal of the observed nodes by enumeration.
    Oracle {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Total-variation distance between two table CSVs.
    Compare { a: PathBuf, b: PathBuf },
    /// Write a generated network file.
    Generate {
        #[command(subcommand)]
        which: Generator,
        #[arg(long, env = "PPSL_SEED", default_value_t = 1, global = true)]
        seed: u64,
        #[arg(long, default_value = "net.json", global = true)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Generator {
    /// 19-node network with two correlated branches between A and B.
    Fig3 {
        #[arg(long, default_value_t = 0.8)]
        r: f64,
    },
    /// Layered random Bayesian network with skip-layer edges.
    Layered {
        #[arg(long, value_delimiter = ',', required = true)]
        layers: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        skips: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    net: PathBuf,
    /// Observation nodes (labels or indices); default all labeled nodes.
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<String>,
    #[arg(long, env = "PPSL_SEED", default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tau_t: f64,
    /// tau_N0 (d1) or tau_N (d2), ns.
    #[arg(long, default_value_t = 1.0)]
    tau_n: f64,
    #[arg(long, default_value_t = 0.0)]
    tau_s: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    imtj: f64,
    #[arg(long, value_enum, default_value_t = Mode::Continuous)]
    mtj_mode: Mode,
    /// Simulated time, ns (default 10^4 tau_N).
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    sweeps: u64,
    /// `auto`, `topological`, `random`, or a comma-separated node order.
    #[arg(long, default_value = "auto")]
    policy: String,
    /// Record every n-th step.
    #[arg(long)]
    stride: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Clocked,
    D1,
    D2,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Continuous,
    Bipolar,
}

impl ParamArgs {
    fn into_params(self) -> anyhow::Result<EngineParams> {
        let policy = match self.policy.as_str() {
            "auto" => PolicyChoice::Auto,
            "topological" => PolicyChoice::Topological,
            "random" => PolicyChoice::Random,
            list => PolicyChoice::Fixed(
                list.split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| anyhow::anyhow!("unknown policy `{list}`"))?,
            ),
        };
        Ok(EngineParams {
            tau_t: self.tau_t,
            tau_n: self.tau_n,
            tau_s: self.tau_s,
            dt: self.dt,
            i_mtj: self.imtj,
            mtj_mode: match self.mtj_mode {
                Mode::Continuous => MtjMode::Continuous,
                Mode::Bipolar => MtjMode::Bipolar,
            },
            duration: self.duration,
            stride: self.stride,
            sweeps: self.sweeps,
            policy,
        })
    }
}

impl From<Engine> for EngineChoice {
    fn from(e: Engine) -> Self {
        match e {
            Engine::Clocked => EngineChoice::Clocked,
            Engine::D1 => EngineChoice::D1,
            Engine::D2 => EngineChoice::D2,
            Engine::Oracle => EngineChoice::Oracle,
        }
    }
}

fn experiment(engine: EngineChoice, common: Common, params: ParamArgs) -> anyhow::Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        engine,
        net: common.net,
        nodes: common.nodes,
        out: common.out,
        seed: common.seed,
        params: params.into_params()?,
        write_trace: false,
    })
}

fn real_main(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            engine,
            common,
            params,
            trace,
        } => {
            let mut cfg = experiment(engine.into(), common, params)?;
            cfg.write_trace = trace;
            println!("seed={}", cfg.seed);
            let r = cmd_run(&cfg)?;
            println!("params_digest={:016x}", r.params_digest);
            for w in &r.warnings {
                println!("warning: {w}");
            }
            match r.tv_to_oracle {
                Some(tv) => println!("tv_to_oracle={tv}"),
                None => println!("tv_to_oracle=n/a (network too large to enumerate)"),
            }
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep {
            common,
            params,
            ratios,
        } => {
            let cfg = experiment(EngineChoice::D1, common, params)?;
            println!("seed={}", cfg.seed);
            for p in cmd_sweep_ratio(&cfg, &ratios)? {
                println!("ratio={} tv={}", p.ratio, p.tv);
            }
        }
        Command::Characterize {
            engine,
            seed,
            out,
            params,
            inputs,
            ensembles,
            step_window,
        } => {
            println!("seed={seed}");
            let r = cmd_characterize(&CharacterizeConfig {
                engine: engine.into(),
                params: params.into_params()?,
                seed,
                out,
                inputs,
                ensembles,
                step_window,
            })?;
            println!("params_digest={:016x}", r.params_digest);
            println!(
                "tau_corr={} tau_step={} tau_step/tau_corr={}",
                r.tau_corr,
                r.tau_step,
                r.ratio()
            );
        }
        Command::Oracle { net, nodes, out } => {
            let (names, table) = cmd_oracle(&net, &nodes, &out)?;
            println!("nodes={} total={}", names.join(","), table.total());
        }
        Command::Compare { a, b } => println!("tv={}", cmd_compare(&a, &b)?),
        Command::Generate { which, seed, out } => {
            let net = match which {
                Generator::Fig3 { r } => gen_fig3_network(r, seed)?.net,
                Generator::Layered { layers, skips } => gen_layered_random_bn(&layers, skips, seed)?,
            };
            write_network_file(&net, &out)?;
            println!("seed={seed}");
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
