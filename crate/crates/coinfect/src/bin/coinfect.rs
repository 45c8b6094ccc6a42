use clap::Parser;
use coinfect::cli::{self, Cli};

fn main() {
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(artifacts) => {
            let to_stdout = match &args.command {
                cli::Cmd::Analyze(a) => a.common.out.is_none(),
                cli::Cmd::Diagram(a) => a.common.out.is_none(),
                cli::Cmd::Sweep(a) => a.common.out.is_none(),
                cli::Cmd::Simulate(a) => a.common.out.is_none(),
            };
            if to_stdout {
                for a in &artifacts {
                    println!("# ==> {} <==", a.name);
                    print!("{}", a.contents);
                }
            } else {
                for a in &artifacts {
                    println!("{}", a.name);
                }
            }
        }
        Err(e) => {
            eprintln!("{}", e.record());
            std::process::exit(1);
        }
    }
}
