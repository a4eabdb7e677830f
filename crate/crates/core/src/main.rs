use std::io::{self, Write};
use std::process::ExitCode;

/// Stdout that goes quiet once the reader hangs up, as `| head` does.
struct Stdout {
    inner: io::Stdout,
    closed: bool,
}

impl Stdout {
    fn absorb(&mut self, r: io::Result<usize>, len: usize) -> io::Result<usize> {
        match r {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {
                self.closed = true;
                Ok(len)
            }
            r => r,
        }
    }
}

impl Write for Stdout {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        if self.closed {
            return Ok(buf.len());
        }
        let r = self.inner.write(buf);
        self.absorb(r, buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        if self.closed {
            return Ok(());
        }
        let r = self.inner.flush().map(|()| 0);
        self.absorb(r, 0).map(|_| ())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut out = Stdout {
        inner: io::stdout(),
        closed: false,
    };
    let code = isa_mesh::cli::run_cli(std::env::args_os(), &mut out, &mut io::stderr());
    ExitCode::from(code as u8)
}
