use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = freearr_cli::run(std::env::args_os());
    let text = match (result.command.is_empty(), result.exit_code, &result.payload["message"]) {
        // help and version requests
        (true, 0, serde_json::Value::String(m)) => m.trim_end().to_string(),
        _ => serde_json::to_string_pretty(&result).expect("result serializes"),
    };
    // a closed stdout (e.g. piping into `head`) is not an error of the command
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(result.exit_code)
}
