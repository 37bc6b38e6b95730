use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use super::{Classifier, LangIdError, LangTag, UNDETERMINED};

/// Parses one `__label__xx 0.97` prediction line. Extra label/probability
/// pairs after the first are ignored.
pub fn parse_fasttext_line(line: &str) -> Option<LangTag> {
    let mut parts = line.split_whitespace();
    let label = parts.next()?.strip_prefix("__label__")?;
    let score: f64 = parts.next()?.parse().ok()?;
    if label.is_empty() || !score.is_finite() {
        return None;
    }
    Some(LangTag {
        lang: label.to_string(),
        score: score.clamp(0.0, 1.0),
    })
}

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Runs a long-lived external predictor, writing one text per line to its
/// stdin and reading one prediction line back. Suitable for
/// `fasttext predict-prob model.bin - 1` or any wrapper speaking the same
/// line protocol; the child must flush after every answer.
pub struct CommandClassifier {
    labels: Vec<String>,
    pipe: Mutex<Pipe>,
}

impl std::fmt::Debug for CommandClassifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CommandClassifier")
            .field("labels", &self.labels)
            .finish_non_exhaustive()
    }
}

impl CommandClassifier {
    /// Spawns `program args..`. Predictions outside `labels` are reported as
    /// undetermined; an empty `labels` accepts anything.
    pub fn spawn(program: &str, args: &[String], labels: Vec<String>) -> Result<Self, LangIdError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| LangIdError::External(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            labels,
            pipe: Mutex::new(Pipe {
                child,
                stdin,
                stdout,
            }),
        })
    }
}

impl Classifier for CommandClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, text: &str) -> Result<LangTag, LangIdError> {
        let io = |e: std::io::Error| LangIdError::External(e.to_string());
        let one_line: String = text
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        let mut pipe = self.pipe.lock().unwrap_or_else(|p| p.into_inner());
        writeln!(pipe.stdin, "{one_line}").map_err(io)?;
        pipe.stdin.flush().map_err(io)?;
        let mut answer = String::new();
        if pipe.stdout.read_line(&mut answer).map_err(io)? == 0 {
            return Err(LangIdError::External("predictor closed its output".into()));
        }
        let tag = parse_fasttext_line(&answer)
            .ok_or_else(|| LangIdError::External(format!("unreadable prediction {answer:?}")))?;
        if !self.labels.is_empty() && !self.labels.contains(&tag.lang) {
            return Ok(LangTag {
                lang: UNDETERMINED.to_string(),
                score: 0.0,
            });
        }
        Ok(tag)
    }
}

impl Drop for CommandClassifier {
    fn drop(&mut self) {
        if let Ok(pipe) = self.pipe.get_mut() {
            let _ = pipe.child.kill();
            let _ = pipe.child.wait();
        }
    }
}
