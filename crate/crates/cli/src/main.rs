use std::path::PathBuf;
use std::process::ExitCode;

use trisolve_cli::{commands, config::Experiment};

const USAGE: &str = "\
trisolve — window thresholds and multiple solutions of perturbed Neumann
p-Laplacian problems on box domains

USAGE:
    trisolve <COMMAND> --config <path> [OPTIONS]

COMMANDS:
    thresholds   compute the admissible window and the cubic cross-check
    solve        find distinct solutions at one (lambda, mu) pair
    sweep        grid over a lambda interval with mu-continuation
    oracle       constant-solution roots, verified through the residual

OPTIONS:
    --config <path>   experiment config file (required)
    --lambda <x>      forcing parameter (solve, oracle)
    --mu <x>          perturbation multiplier (solve; default 0)
    --force           skip the window membership check
    --seed <n>        override solver.rng_seed
    --out <dir>       override output.dir
    --verbose         write solver traces
    -h, --help        print this help

EXIT CODES:
    0 ok, 1 configuration error, 2 window condition failed,
    3 lambda outside the window, 4 unbounded window needs an explicit
    endpoint, 5 oracle precondition violated
";

struct Args {
    command: String,
    config: Option<PathBuf>,
    lambda: Option<f64>,
    mu: Option<f64>,
    force: bool,
    seed: Option<u64>,
    out: Option<PathBuf>,
    verbose: bool,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    if argv.is_empty() || argv[0] == "-h" || argv[0] == "--help" {
        return Err(String::new());
    }
    let command = argv[0].clone();
    if !matches!(command.as_str(), "thresholds" | "solve" | "sweep" | "oracle") {
        return Err(format!("unknown command `{command}`"));
    }
    let mut args = Args {
        command,
        config: None,
        lambda: None,
        mu: None,
        force: false,
        seed: None,
        out: None,
        verbose: false,
    };
    let mut it = argv[1..].iter();
    while let Some(flag) = it.next() {
        let mut value_of = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| format!("{name} expects a value"))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value_of("--config")?)),
            "--lambda" => {
                args.lambda = Some(
                    value_of("--lambda")?
                        .parse()
                        .map_err(|_| "--lambda expects a number".to_string())?,
                )
            }
            "--mu" => {
                args.mu = Some(
                    value_of("--mu")?
                        .parse()
                        .map_err(|_| "--mu expects a number".to_string())?,
                )
            }
            "--seed" => {
                args.seed = Some(
                    value_of("--seed")?
                        .parse()
                        .map_err(|_| "--seed expects an integer".to_string())?,
                )
            }
            "--out" => args.out = Some(PathBuf::from(value_of("--out")?)),
            "--force" => args.force = true,
            "--verbose" => args.verbose = true,
            "-h" | "--help" => return Err(String::new()),
            other => return Err(format!("unknown option `{other}`")),
        }
    }
    Ok(args)
}

fn run() -> u8 {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(args) => args,
        Err(msg) => {
            if msg.is_empty() {
                print!("{USAGE}");
                return commands::EXIT_OK;
            }
            eprintln!("error: {msg}");
            eprint!("{USAGE}");
            return commands::EXIT_CONFIG;
        }
    };
    let Some(config_path) = args.config else {
        eprintln!("error: --config is required");
        return commands::EXIT_CONFIG;
    };
    let mut exp = match Experiment::from_file(&config_path) {
        Ok(exp) => exp,
        Err(e) => {
            eprintln!("error: {e}");
            return commands::EXIT_CONFIG;
        }
    };
    if let Some(seed) = args.seed {
        exp.solver.rng_seed = seed;
    }
    if let Some(out) = args.out {
        exp.out_dir = out;
    }

    let result = match args.command.as_str() {
        "thresholds" => commands::cmd_thresholds(&exp),
        "solve" => match args.lambda {
            Some(lambda) => commands::cmd_solve(
                &exp,
                lambda,
                args.mu.unwrap_or(0.0),
                args.force,
                args.verbose,
            ),
            None => {
                eprintln!("error: solve requires --lambda");
                return commands::EXIT_CONFIG;
            }
        },
        "sweep" => commands::cmd_sweep(&exp, args.force),
        "oracle" => match args.lambda {
            Some(lambda) => commands::cmd_oracle(&exp, lambda),
            None => {
                eprintln!("error: oracle requires --lambda");
                return commands::EXIT_CONFIG;
            }
        },
        _ => unreachable!("validated above"),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run())
}
