//! Model hosted in a child process, spoken to over standard streams.
//!
//! Protocol: the child prints `READY` once. For each batch the parent writes
//! `PREDICT <n>` followed by `n` comma-separated rows; the child answers with
//! `n` lines holding one real each.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use super::{check_input_width, Model};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

struct Channel {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    // lines read from the child so far, for error messages
    line: usize,
}

impl Channel {
    fn read_line(&mut self) -> Result<String> {
        let mut buf = String::new();
        let n = self.stdout.read_line(&mut buf)?;
        self.line += 1;
        if n == 0 {
            return Err(Error::Protocol {
                line: self.line,
                message: "child closed its output".into(),
            });
        }
        Ok(buf.trim().to_string())
    }
}

pub struct ExternalModel {
    dim: usize,
    command: String,
    channel: Mutex<Channel>,
}

impl ExternalModel {
    /// Start `command` through `sh -c` and wait for its `READY` line.
    pub fn spawn(command: &str, dim: usize) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = child.stdin.take().ok_or(Error::Io("no child stdin".into()))?;
        let stdout = child.stdout.take().ok_or(Error::Io("no child stdout".into()))?;
        let mut channel = Channel {
            child,
            stdin,
            stdout: BufReader::new(stdout),
            line: 0,
        };
        let hello = channel.read_line()?;
        if hello != "READY" {
            return Err(Error::Protocol {
                line: channel.line,
                message: format!("expected READY, got {hello:?}"),
            });
        }
        Ok(Self {
            dim,
            command: command.to_string(),
            channel: Mutex::new(channel),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }
}

impl Model for ExternalModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict_batch(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        check_input_width(self.dim, inputs.cols())?;
        let mut ch = self
            .channel
            .lock()
            .map_err(|_| Error::Io("external model channel poisoned".into()))?;
        let mut request = format!("PREDICT {}\n", inputs.rows());
        for i in 0..inputs.rows() {
            let row: Vec<String> = inputs.row(i).iter().map(|v| format!("{v:?}")).collect();
            request.push_str(&row.join(","));
            request.push('\n');
        }
        ch.stdin.write_all(request.as_bytes())?;
        ch.stdin.flush()?;
        let mut out = Vec::with_capacity(inputs.rows());
        for _ in 0..inputs.rows() {
            let text = ch.read_line()?;
            let value: f64 = text.parse().map_err(|_| Error::Protocol {
                line: ch.line,
                message: format!("expected a real number, got {text:?}"),
            })?;
            out.push(value);
        }
        Ok(out)
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        if let Ok(ch) = self.channel.get_mut() {
            let _ = ch.child.kill();
            let _ = ch.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // replies with the first coordinate, or with `reply` when given
    fn shell_model(reply: Option<&str>) -> String {
        let out = reply.map_or("\"$a\"".to_string(), |r| format!("'{r}'"));
        format!(
            "echo READY; while IFS=, read -r a rest; do case \"$a\" in PREDICT*) ;; *) echo {out};; esac; done"
        )
    }

    #[test]
    fn round_trip_projection_model() {
        let m = ExternalModel::spawn(&shell_model(None), 2).unwrap();
        let x = Matrix::from_rows(&[vec![1.5, 2.0], vec![-0.5, 0.25]]).unwrap();
        assert_eq!(m.predict_batch(&x).unwrap(), vec![1.5, -0.5]);
        assert_eq!(m.predict(&[3.0, 1.0]).unwrap(), 3.0);
    }

    #[test]
    fn malformed_reply_names_line() {
        let m = ExternalModel::spawn(&shell_model(Some("oops")), 1).unwrap();
        let x = Matrix::from_rows(&[vec![1.0]]).unwrap();
        match m.predict_batch(&x) {
            Err(Error::Protocol { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_ready_is_an_error() {
        let err = ExternalModel::spawn("echo hello", 1).err().unwrap();
        assert!(matches!(err, Error::Protocol { line: 1, .. }));
    }
}
