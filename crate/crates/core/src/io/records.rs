//! JSON Lines subtitle and spotting records.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Source, Spotting, SubtitleRecord};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubtitleLine {
    id: String,
    video: String,
    start_frame: u64,
    end_frame: u64,
    text: String,
    aligned: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpottingLine {
    video: String,
    word: String,
    frame: u64,
    conf: f32,
    source: String,
}

/// Calls `parse` on every non-blank line, attaching 1-based line numbers to errors.
fn parse_lines<R, T, F>(source: R, mut parse: F) -> Result<Vec<T>>
where
    R: BufRead,
    F: FnMut(&str, usize) -> Result<T>,
{
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse(&line, i + 1)?);
    }
    Ok(out)
}

fn relabel(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Data(message) => Error::Parse { line, message },
        Error::UnknownTag { tag, .. } => Error::UnknownTag { line, tag },
        other => other,
    }
}

pub fn read_subtitles<R: BufRead>(source: R) -> Result<Vec<SubtitleRecord>> {
    parse_lines(source, |text, line| {
        let rec: SubtitleLine = serde_json::from_str(text).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        SubtitleRecord::new(rec.id, rec.video, rec.start_frame, rec.end_frame, rec.text, rec.aligned)
            .map_err(relabel(line))
    })
}

pub fn write_subtitles<W: Write>(subtitles: &[SubtitleRecord], sink: &mut W) -> Result<()> {
    for s in subtitles {
        let line = SubtitleLine {
            id: s.subtitle_id.clone(),
            video: s.video_id.clone(),
            start_frame: s.start_frame,
            end_frame: s.end_frame,
            text: s.text.clone(),
            aligned: s.aligned,
        };
        serde_json::to_writer(&mut *sink, &line).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_spottings<R: BufRead>(source: R) -> Result<Vec<Spotting>> {
    parse_lines(source, |text, line| {
        let rec: SpottingLine = serde_json::from_str(text).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let tag: Source = rec.source.parse().map_err(relabel(line))?;
        Spotting::new(rec.video, rec.word, rec.frame, rec.conf, tag).map_err(relabel(line))
    })
}

pub fn write_spottings<W: Write>(spottings: &[Spotting], sink: &mut W) -> Result<()> {
    for s in spottings {
        let line = SpottingLine {
            video: s.video_id.clone(),
            word: s.keyword.clone(),
            frame: s.frame,
            conf: s.confidence,
            source: s.source.as_str().to_string(),
        };
        serde_json::to_writer(&mut *sink, &line).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}
