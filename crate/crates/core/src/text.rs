// SPDX-License-Identifier: Apache-2.0

//! Source locations, file identities, content hashes and line indexes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::{
    collections::HashMap,
    fmt,
    path::{Path, PathBuf},
};

/// Opaque identifier of a source file.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct FileId(pub u32);

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Half-open byte range `[start, end)` inside one file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceLocation {
    pub file: FileId,
    pub start: u32,
    pub end: u32,
}

impl SourceLocation {
    pub fn new(file: FileId, start: u32, end: u32) -> Self {
        debug_assert!(start <= end);
        Self { file, start, end }
    }

    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Smallest location covering both `self` and `other` (same file).
    pub fn cover(&self, other: SourceLocation) -> SourceLocation {
        SourceLocation {
            file: self.file,
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    /// `start <= pos < end`
    pub fn contains(&self, pos: u32) -> bool {
        self.start <= pos && pos < self.end
    }

    /// `start <= pos <= end`; used for cursor positions that may sit right after a token.
    pub fn touches(&self, pos: u32) -> bool {
        self.start <= pos && pos <= self.end
    }

    pub fn encloses(&self, other: &SourceLocation) -> bool {
        self.file == other.file && self.start <= other.start && other.end <= self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start as usize..self.end as usize]
    }
}

/// SHA-256 digest of some content.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContentHash(pub [u8; 32]);

impl ContentHash {
    pub fn of(bytes: &[u8]) -> Self {
        Self(Sha256::digest(bytes).into())
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentHash({})", &self.to_hex()[..12])
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Interns file paths into stable [`FileId`]s.
#[derive(Debug, Default, Clone)]
pub struct FileRegistry {
    paths: Vec<PathBuf>,
    ids: HashMap<PathBuf, FileId>,
}

impl FileRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, path: &Path) -> FileId {
        if let Some(id) = self.ids.get(path) {
            return *id;
        }
        let id = FileId(self.paths.len() as u32);
        self.paths.push(path.to_path_buf());
        self.ids.insert(path.to_path_buf(), id);
        id
    }

    pub fn lookup(&self, path: &Path) -> Option<FileId> {
        self.ids.get(path).copied()
    }

    pub fn path(&self, id: FileId) -> Option<&Path> {
        self.paths.get(id.0 as usize).map(PathBuf::as_path)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Zero-based line and UTF-16 column, the protocol position currency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineCol {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct WideChar {
    /// byte offset of the char from the line start
    start: u32,
    len_utf8: u8,
    len_utf16: u8,
}

/// Maps byte offsets to (line, UTF-16 column) and back.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineIndex {
    line_starts: Vec<u32>,
    len: u32,
    /// Non-ASCII chars per line; lines with only ASCII are absent.
    wide: Vec<(u32, Vec<WideChar>)>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        let mut wide: Vec<(u32, Vec<WideChar>)> = Vec::new();
        let mut line = 0u32;
        let mut line_start = 0usize;
        for (i, c) in text.char_indices() {
            if c == '\n' {
                line += 1;
                line_start = i + 1;
                line_starts.push(line_start as u32);
                continue;
            }
            if !c.is_ascii() {
                let wc = WideChar {
                    start: (i - line_start) as u32,
                    len_utf8: c.len_utf8() as u8,
                    len_utf16: c.len_utf16() as u8,
                };
                match wide.last_mut() {
                    Some((l, chars)) if *l == line => chars.push(wc),
                    _ => wide.push((line, vec![wc])),
                }
            }
        }
        Self {
            line_starts,
            len: text.len() as u32,
            wide,
        }
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    fn wide_chars(&self, line: u32) -> &[WideChar] {
        match self.wide.binary_search_by_key(&line, |(l, _)| *l) {
            Ok(i) => &self.wide[i].1,
            Err(_) => &[],
        }
    }

    /// Offsets past the end clamp to the end of the text.
    pub fn line_col(&self, offset: u32) -> LineCol {
        let offset = offset.min(self.len);
        let line = match self.line_starts.binary_search(&offset) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        let byte_col = offset - self.line_starts[line];
        let mut col = byte_col;
        for wc in self.wide_chars(line as u32) {
            if wc.start < byte_col {
                col -= wc.len_utf8 as u32 - wc.len_utf16 as u32;
            }
        }
        LineCol {
            line: line as u32,
            col,
        }
    }

    /// Positions past the end of a line clamp to the line end; lines past
    /// the end clamp to the end of the text.
    pub fn offset(&self, pos: LineCol) -> u32 {
        let Some(&line_start) = self.line_starts.get(pos.line as usize) else {
            return self.len;
        };
        let line_end = self
            .line_starts
            .get(pos.line as usize + 1)
            .map(|s| s - 1)
            .unwrap_or(self.len);
        let mut byte_col = pos.col;
        for wc in self.wide_chars(pos.line) {
            // utf16 column of this char's start
            let utf16_start = wc.start - (byte_col - pos.col);
            if utf16_start < pos.col {
                byte_col += wc.len_utf8 as u32 - wc.len_utf16 as u32;
            } else {
                break;
            }
        }
        (line_start + byte_col).min(line_end)
    }
}
