use std::process::ExitCode;

fn main() -> ExitCode {
    let code = match rmtlab::parse_args(std::env::args_os().skip(1)) {
        Err(rmtlab::LabError::Cli(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("rmtlab: {e}");
            e.exit_code()
        }
        Ok(inv) => match rmtlab::run(&inv, &mut std::io::stdout()) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("rmtlab: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
