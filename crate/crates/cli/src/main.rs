use clap::Parser;

fn main() {
    let cli = match bimetric3_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                bimetric3_cli::EXIT_INPUT
            } else {
                0
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = bimetric3_cli::run(cli, &mut std::io::stderr());
    std::process::exit(code);
}
