use guessrank::cli::run_command;

fn main() {
    let result = run_command(std::env::args_os());
    print!("{}", result.stdout);
    eprint!("{}", result.stderr);
    std::process::exit(result.exit_code);
}
