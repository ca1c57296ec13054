use std::io::{self, Write};

fn main() {
    let stdin = io::stdin();
    let (mut stdout, mut stderr) = (io::stdout(), io::stderr());
    let code = qaplan::cli::run(std::env::args_os(), &mut stdin.lock(), &mut stdout, &mut stderr);
    let _ = stdout.flush();
    std::process::exit(code);
}
