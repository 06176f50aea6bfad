//! Structured `level key=value` log lines on stderr.

pub fn log(level: &str, pairs: &[(&str, String)]) {
    let mut line = String::from(level);
    for (k, v) in pairs {
        line.push(' ');
        line.push_str(k);
        line.push('=');
        if v.contains(' ') {
            line.push('"');
            line.push_str(v);
            line.push('"');
        } else {
            line.push_str(v);
        }
    }
    eprintln!("{line}");
}

#[macro_export]
macro_rules! info {
    ($($key:ident = $value:expr),+ $(,)?) => {
        $crate::logfmt::log("info", &[$((stringify!($key), format!("{}", $value))),+])
    };
}

#[macro_export]
macro_rules! warn_log {
    ($($key:ident = $value:expr),+ $(,)?) => {
        $crate::logfmt::log("warn", &[$((stringify!($key), format!("{}", $value))),+])
    };
}
