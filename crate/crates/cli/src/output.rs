use serde_json::{json, Value};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Code {
    Ok = 0,
    Violation = 1,
    Usage = 2,
    Unknown = 3,
}

impl Code {
    pub fn status(self) -> &'static str {
        match self {
            Code::Ok => "ok",
            Code::Violation => "violation",
            Code::Usage => "error",
            Code::Unknown => "unknown",
        }
    }
}

/// A command's result in both renderings.
#[derive(Debug)]
pub struct Outcome {
    pub code: Code,
    pub lines: Vec<String>,
    pub records: Vec<Value>,
}

impl Outcome {
    pub fn new(code: Code) -> Self {
        Outcome { code, lines: Vec::new(), records: Vec::new() }
    }

    pub fn line(mut self, text: impl Into<String>) -> Self {
        self.lines.push(text.into());
        self
    }

    pub fn text(mut self, block: &str) -> Self {
        self.lines.extend(block.lines().map(str::to_string));
        self
    }

    pub fn record(mut self, value: Value) -> Self {
        self.records.push(value);
        self
    }
}

/// A failure reported on stderr with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: Code,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: Code::Usage, message: message.into() }
    }

    pub fn violation(message: impl Into<String>) -> Self {
        Failure { code: Code::Violation, message: message.into() }
    }

    pub fn unknown(message: impl Into<String>) -> Self {
        Failure { code: Code::Unknown, message: message.into() }
    }

    pub fn record(&self, command: &str) -> Value {
        json!({ "command": command, "status": self.code.status(), "message": self.message })
    }
}

/// Tag every record with the command name and the exit status.
pub fn finish(command: &str, outcome: &Outcome) -> Vec<String> {
    outcome
        .records
        .iter()
        .map(|r| {
            let mut obj = serde_json::Map::new();
            obj.insert("command".into(), json!(command));
            obj.insert("status".into(), json!(outcome.code.status()));
            if let Value::Object(fields) = r {
                obj.extend(fields.clone());
            }
            Value::Object(obj).to_string()
        })
        .collect()
}
