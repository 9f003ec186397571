//! Recursive character splitting with overlap.
//!
//! Text is split on the first separator of the hierarchy that occurs in it
//! (paragraph break, line break, sentence end, space, then single
//! characters). Fragments shorter than the chunk size are merged greedily
//! into chunks; longer fragments recurse one level down. Separators stay
//! attached to the fragment they end, and fragments are never trimmed, so
//! every chunk is an exact substring of the source and the chunk spans
//! cover the whole text.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{KbError, SourceDocument};

pub const DEFAULT_CHUNK_SIZE: usize = 1200;
pub const DEFAULT_CHUNK_OVERLAP: usize = 200;

/// Separator hierarchy; below the last entry text is split per character.
pub const SEPARATORS: [&str; 4] = ["\n\n", "\n", ". ", " "];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkOptions {
    pub chunk_size: usize,
    pub overlap: usize,
}

impl Default for ChunkOptions {
    fn default() -> Self {
        ChunkOptions { chunk_size: DEFAULT_CHUNK_SIZE, overlap: DEFAULT_CHUNK_OVERLAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub chunk_index: usize,
    pub text: String,
    /// `[start, end)` offsets into the source text, in characters.
    pub char_span: (usize, usize),
}

impl Chunk {
    pub fn id(&self) -> String {
        chunk_id(&self.doc_id, self.chunk_index)
    }
}

pub fn chunk_id(doc_id: &str, chunk_index: usize) -> String {
    format!("{doc_id}#{chunk_index}")
}

/// A contiguous byte range of the source with its length in characters.
#[derive(Debug, Clone, Copy)]
struct Piece {
    start: usize,
    end: usize,
    chars: usize,
}

struct Splitter<'a> {
    text: &'a str,
    size: usize,
    overlap: usize,
}

impl Splitter<'_> {
    fn piece(&self, start: usize, end: usize) -> Piece {
        Piece { start, end, chars: self.text[start..end].chars().count() }
    }

    /// Splits `[start, end)` on the first separator at or below `level`.
    fn fragments(&self, start: usize, end: usize, level: usize) -> (Vec<Piece>, Option<usize>) {
        let slice = &self.text[start..end];
        let found = SEPARATORS[level.min(SEPARATORS.len())..]
            .iter()
            .position(|sep| slice.contains(sep))
            .map(|offset| level + offset);
        let Some(sep_level) = found else {
            let pieces = slice
                .char_indices()
                .map(|(i, c)| Piece { start: start + i, end: start + i + c.len_utf8(), chars: 1 })
                .collect();
            return (pieces, None);
        };
        let sep = SEPARATORS[sep_level];
        let mut pieces = Vec::new();
        let mut cursor = 0;
        for (at, _) in slice.match_indices(sep) {
            let piece_end = at + sep.len();
            pieces.push(self.piece(start + cursor, start + piece_end));
            cursor = piece_end;
        }
        if cursor < slice.len() {
            pieces.push(self.piece(start + cursor, end));
        }
        (pieces, Some(sep_level + 1))
    }

    fn split(&self, start: usize, end: usize, level: usize, out: &mut Vec<(usize, usize)>) {
        let (pieces, next_level) = self.fragments(start, end, level);
        let mut good: Vec<Piece> = Vec::new();
        for piece in pieces {
            if piece.chars < self.size {
                good.push(piece);
                continue;
            }
            if !good.is_empty() {
                self.merge(&good, out);
                good.clear();
            }
            match next_level {
                Some(next) => self.split(piece.start, piece.end, next, out),
                None => out.push((piece.start, piece.end)),
            }
        }
        if !good.is_empty() {
            self.merge(&good, out);
        }
    }

    fn merge(&self, pieces: &[Piece], out: &mut Vec<(usize, usize)>) {
        let mut current: VecDeque<Piece> = VecDeque::new();
        let mut total = 0usize;
        for &piece in pieces {
            if total + piece.chars > self.size && !current.is_empty() {
                out.push((current.front().unwrap().start, current.back().unwrap().end));
                while total > self.overlap || (total + piece.chars > self.size && total > 0) {
                    total -= current.pop_front().unwrap().chars;
                }
            }
            current.push_back(piece);
            total += piece.chars;
        }
        if let (Some(first), Some(last)) = (current.front(), current.back()) {
            out.push((first.start, last.end));
        }
    }
}

/// Splits raw text into byte ranges; exposed for property tests.
pub fn split_ranges(text: &str, opts: ChunkOptions) -> Result<Vec<(usize, usize)>, KbError> {
    if opts.chunk_size == 0 || opts.overlap >= opts.chunk_size {
        return Err(KbError::InvalidParameters(format!(
            "overlap {} must be smaller than chunk size {}",
            opts.overlap, opts.chunk_size
        )));
    }
    let splitter = Splitter { text, size: opts.chunk_size, overlap: opts.overlap };
    let mut out = Vec::new();
    if !text.is_empty() {
        splitter.split(0, text.len(), 0, &mut out);
    }
    Ok(out)
}

/// Chunks a document. Chunks are numbered from 0 in source order.
pub fn ingest_document(doc: &SourceDocument, opts: ChunkOptions) -> Result<Vec<Chunk>, KbError> {
    if doc.text.is_empty() {
        return Err(KbError::EmptyDocument(doc.doc_id.clone()));
    }
    let ranges = split_ranges(&doc.text, opts)?;

    // byte offset -> char offset, only at char boundaries
    let mut char_at = vec![0usize; doc.text.len() + 1];
    let mut count = 0;
    for (i, c) in doc.text.char_indices() {
        char_at[i] = count;
        count += 1;
        for b in 1..c.len_utf8() {
            char_at[i + b] = count;
        }
    }
    char_at[doc.text.len()] = count;

    Ok(ranges
        .into_iter()
        .enumerate()
        .map(|(chunk_index, (s, e))| Chunk {
            doc_id: doc.doc_id.clone(),
            chunk_index,
            text: doc.text[s..e].to_string(),
            char_span: (char_at[s], char_at[e]),
        })
        .collect())
}
