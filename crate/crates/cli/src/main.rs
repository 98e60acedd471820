use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

fn main() {
    let cancel = Arc::new(AtomicBool::new(false));
    let flag = cancel.clone();
    if let Err(e) = ctrlc::set_handler(move || {
        if flag.swap(true, Ordering::SeqCst) {
            // Second Ctrl-C: give up on a clean stop.
            std::process::exit(arxivroll_cli::EXIT_INTERRUPTED);
        }
        eprintln!("stopping after in-flight items (Ctrl-C again to abort)");
    }) {
        eprintln!("warning: no Ctrl-C handler: {e}");
    }
    std::process::exit(arxivroll_cli::run_with_cancel(std::env::args_os(), cancel));
}
