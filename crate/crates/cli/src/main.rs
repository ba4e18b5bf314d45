//! `lyricgenre` command-line tool. Each subcommand reads and writes files so
//! stages can be cached and swapped independently.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lyricgenre::{Category, Error};

#[derive(Parser)]
#[command(
    name = "lyricgenre",
    version,
    about = "Cross-lingual music genre classification from lyrics"
)]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read CSV or JSONL lyrics, detect languages and drop mislabeled songs.
    Ingest(commands::IngestArgs),
    /// Rank genres per language and write the shared selection with counts.
    SelectGenres(commands::SelectArgs),
    /// Embed every song of a corpus into a LYRE file.
    Embed(commands::EmbedArgs),
    /// Train one-vs-all genre models on a corpus.
    Train(commands::TrainArgs),
    /// Run the bootstrap evaluation described by a run config.
    Bootstrap(commands::BootstrapArgs),
    /// Aggregate a results file into train-by-test tables.
    Report(commands::ReportArgs),
    /// Print genre decisions for new lyrics, one per input line.
    Predict(commands::PredictArgs),
}

fn exit_code(category: Category) -> u8 {
    match category {
        Category::Usage => 1,
        Category::Data => 2,
        Category::Numeric => 3,
    }
}

fn report_error(err: &Error) -> ExitCode {
    let category = err.category();
    let kind = match category {
        Category::Usage => "usage",
        Category::Data => "data",
        Category::Numeric => "numeric",
    };
    let message = err.to_string().replace(['\n', '\t'], " ");
    eprintln!("error\t{kind}\t{message}");
    ExitCode::from(exit_code(category))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return report_error(&Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return report_error(&Error::Config(format!("thread pool: {e}"))),
    };

    let result = pool.install(|| match cli.command {
        Command::Ingest(a) => commands::ingest_cmd(a),
        Command::SelectGenres(a) => commands::select_genres_cmd(a),
        Command::Embed(a) => commands::embed_cmd(a),
        Command::Train(a) => commands::train_cmd(a),
        Command::Bootstrap(a) => commands::bootstrap_cmd(a),
        Command::Report(a) => commands::report_cmd(a),
        Command::Predict(a) => commands::predict_cmd(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(&e),
    }
}
