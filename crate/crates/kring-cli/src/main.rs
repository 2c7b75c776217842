use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exact K-ring analyses for chamber fans and the associated group
/// embeddings: membership, decomposition, multiplication rules,
/// cellularity and orientation reports.
#[derive(Parser)]
#[command(name = "kring", version)]
struct Args {
    /// problem description (json)
    #[arg(long)]
    input: PathBuf,

    /// analysis to run
    #[arg(long)]
    command: String,

    /// command payload (json), for commands that take classes or options
    #[arg(long)]
    payload: Option<PathBuf>,

    /// output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// worker threads for independent checks; does not affect output bytes
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Text,
}

fn render(report: &kring_cli::Report, format: Format) -> String {
    match format {
        Format::Json => report.render_json(),
        Format::Text => report.render_text(),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let fail = |command: &str, message: String| kring_cli::Report {
        command: command.to_string(),
        status: kring_cli::Status::Fail,
        payload: serde_json::json!({ "error": message }),
    };

    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            let r = fail(&args.command, format!("{}: {e}", args.input.display()));
            print!("{}", render(&r, args.format));
            return ExitCode::from(1);
        }
    };
    let problem = match kring_cli::load_problem_text(&text) {
        Ok(p) => p,
        Err(e) => {
            let r = fail(&args.command, e.to_string());
            print!("{}", render(&r, args.format));
            return ExitCode::from(1);
        }
    };
    let payload = match &args.payload {
        None => None,
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))
            .and_then(|t| {
                serde_json::from_str::<serde_json::Value>(&t)
                    .map_err(|e| format!("payload: malformed json: {e}"))
            }) {
            Ok(v) => Some(v),
            Err(msg) => {
                let r = fail(&args.command, msg);
                print!("{}", render(&r, args.format));
                return ExitCode::from(1);
            }
        },
    };

    let report = kring_cli::run(&problem, &args.command, payload.as_ref(), args.threads);
    print!("{}", render(&report, args.format));
    ExitCode::from(report.status.exit_code() as u8)
}
