//! Single-directory wildcard matching: `*` is any run of characters
//! (including none), `?` is exactly one character.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobPattern {
    chars: Vec<char>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("glob pattern {0:?} contains a path separator")]
pub struct GlobError(pub String);

impl GlobPattern {
    pub fn new(pattern: &str) -> Result<Self, GlobError> {
        if pattern.contains(['/', '\\']) {
            return Err(GlobError(pattern.to_string()));
        }
        Ok(GlobPattern { chars: pattern.chars().collect() })
    }

    /// Whole-name match.
    pub fn matches(&self, name: &str) -> bool {
        let name: Vec<char> = name.chars().collect();
        let pat = &self.chars;
        let (mut p, mut n) = (0usize, 0usize);
        // Position of the last `*` and the name index it is currently
        // absorbing up to.
        let mut star: Option<(usize, usize)> = None;
        while n < name.len() {
            if p < pat.len() && (pat[p] == '?' || (pat[p] != '*' && pat[p] == name[n])) {
                p += 1;
                n += 1;
            } else if p < pat.len() && pat[p] == '*' {
                star = Some((p, n));
                p += 1;
            } else if let Some((sp, sn)) = star {
                p = sp + 1;
                n = sn + 1;
                star = Some((sp, sn + 1));
            } else {
                return false;
            }
        }
        pat[p..].iter().all(|&c| c == '*')
    }

    fn starts_with_dot(&self) -> bool {
        self.chars.first() == Some(&'.')
    }
}

impl fmt::Display for GlobPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.chars.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

pub fn glob_match(pattern: &GlobPattern, name: &str) -> bool {
    pattern.matches(name)
}

/// Entries of `dir` (not its subdirectories' contents) whose names match,
/// joined to `dir` and sorted.
///
/// As with shell globbing, names starting with `.` only match patterns that
/// start with `.`.
pub fn list_matching(dir: impl AsRef<Path>, pattern: &GlobPattern) -> io::Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if name.starts_with('.') && !pattern.starts_with_dot() {
            continue;
        }
        if pattern.matches(name) {
            out.push(dir.join(name));
        }
    }
    out.sort();
    Ok(out)
}
