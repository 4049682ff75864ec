use serde_json::{json, Value};

/// Version tag written into every record.
pub const FORMAT: &str = "pingpong-record/1";

/// Outcome classes and their process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Refused,
    Fail,
    ParseError,
    Unsupported,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Refused => 2,
            Status::ParseError => 64,
            Status::Unsupported => 65,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Refused => "refused",
            Status::ParseError => "parse-error",
            Status::Unsupported => "unsupported",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub record: Value,
}

impl Outcome {
    /// Pretty JSON with a trailing newline. Object keys are sorted, so equal
    /// records render to equal bytes.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.record).expect("records are plain JSON");
        s.push('\n');
        s
    }
}

pub(crate) fn envelope(command: &str, config: &Value, status: Status, body: (&str, Value)) -> Outcome {
    let mut record = json!({
        "format": FORMAT,
        "command": command,
        "status": status.name(),
        "exit_code": status.exit_code(),
        "config": config,
    });
    record[body.0] = body.1;
    Outcome { status, record }
}
