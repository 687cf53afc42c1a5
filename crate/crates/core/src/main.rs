use clap::Parser;
use relscott::cli::{self, Command, Manifest};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "relscott", version, about = "Thomas-Fermi, Weyl and relativistic Scott-term experiments")]
struct Args {
    /// Experiment to run; overrides the manifest's `command`.
    #[arg(value_enum)]
    command: Option<Command>,
    /// TOML manifest. Missing sections take their defaults.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for the rayon pool.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let args = Args::parse();
    if let Some(t) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            std::process::exit(2);
        }
    }
    let mut manifest = match &args.manifest {
        Some(p) => match std::fs::read_to_string(p)
            .map_err(relscott::Error::from)
            .and_then(|s| Manifest::from_toml(&s))
        {
            Ok(m) => m,
            Err(e) => {
                // still leave an error record where the artifacts would go
                let _ = std::fs::create_dir_all(&args.out);
                let rec = serde_json::json!({ "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() });
                let _ = std::fs::write(args.out.join("error.json"), rec.to_string() + "\n");
                eprintln!("error: {e}");
                std::process::exit(e.exit_code());
            }
        },
        None => Manifest::default(),
    };
    if let Some(c) = args.command {
        manifest.command = Some(c);
    }
    if let Some(s) = args.seed {
        manifest.seed = s;
    }
    std::process::exit(cli::run(&manifest, &args.out));
}
