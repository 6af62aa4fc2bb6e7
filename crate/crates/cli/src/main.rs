use clap::Parser;

/// Die quietly when a downstream pipe closes (e.g. `tiercache ... | head`)
/// instead of panicking on the failed write.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = tiercache_cli::app::Cli::parse();
    if let Err(err) = tiercache_cli::app::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
