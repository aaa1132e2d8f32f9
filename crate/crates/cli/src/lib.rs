//! Command-line front end: corpus conversion, training, summarization and
//! evaluation.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_convert, cmd_evaluate, cmd_summarize, cmd_train, Command, ConvertArgs, DecodeArgs, EvaluateArgs, SummarizeArgs, TrainArgs};
pub use config::RunConfig;
pub use error::{CliError, CliResult, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK};

pub fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Convert(a) => cmd_convert(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Summarize(a) => cmd_summarize(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
    }
}
