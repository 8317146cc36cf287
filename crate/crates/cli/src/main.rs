use std::io::Write;

fn main() {
    convexlab_cli::configure_threads();
    let out = convexlab_cli::run(std::env::args_os());
    std::io::stdout().write_all(&out.stdout).expect("stdout");
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
