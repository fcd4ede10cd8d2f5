use std::io::IsTerminal;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    let color = ldtail_cli::table::use_color(stdout.is_terminal());
    let code = ldtail_cli::run(&argv, &mut stdout.lock(), &mut std::io::stderr().lock(), color);
    std::process::exit(code);
}
