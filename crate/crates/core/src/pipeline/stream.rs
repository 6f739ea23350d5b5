//! Detection-stream ingestion: line-delimited records grouped into per-frame
//! batches.

use std::io::BufRead;

use crate::pipeline::{DetectionRecord, PipelineError};

/// All records of one frame, in stream order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBatch {
    pub frame_id: u64,
    /// Timestamp of the frame's first record.
    pub timestamp_ms: i64,
    pub records: Vec<DetectionRecord>,
}

/// Streaming parser over a line-delimited detection source.
///
/// Records are grouped by consecutive `frame_id`. Malformed lines (bad JSON
/// or invariant violations) are skipped with a logged warning and counted;
/// a decreasing `frame_id` is a fatal format error because it breaks the
/// frame-contiguity contract.
pub struct DetectionStream<R: BufRead> {
    lines: std::io::Lines<R>,
    line_number: usize,
    pending: Option<DetectionRecord>,
    last_frame_id: Option<u64>,
    skipped_lines: u64,
    failed: bool,
}

pub fn parse_stream<R: BufRead>(reader: R) -> DetectionStream<R> {
    DetectionStream {
        lines: reader.lines(),
        line_number: 0,
        pending: None,
        last_frame_id: None,
        skipped_lines: 0,
        failed: false,
    }
}

impl<R: BufRead> DetectionStream<R> {
    /// Lines skipped so far because they failed to parse or validate.
    pub fn skipped_lines(&self) -> u64 {
        self.skipped_lines
    }

    fn next_record(&mut self) -> Result<Option<DetectionRecord>, PipelineError> {
        loop {
            let line = match self.lines.next() {
                None => return Ok(None),
                Some(Err(e)) => return Err(PipelineError::Io(e)),
                Some(Ok(line)) => line,
            };
            self.line_number += 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: DetectionRecord = match serde_json::from_str(&line) {
                Ok(record) => record,
                Err(e) => {
                    log::warn!("skipping line {}: {e}", self.line_number);
                    self.skipped_lines += 1;
                    continue;
                }
            };
            if let Err(reason) = record.validate() {
                log::warn!("skipping line {}: {reason}", self.line_number);
                self.skipped_lines += 1;
                continue;
            }
            if let Some(last) = self.last_frame_id {
                if record.frame_id < last {
                    return Err(PipelineError::Format {
                        line: self.line_number,
                        reason: format!(
                            "frame_id {} after frame_id {last}; stream must be non-decreasing",
                            record.frame_id
                        ),
                    });
                }
            }
            self.last_frame_id = Some(record.frame_id);
            return Ok(Some(record));
        }
    }
}

impl<R: BufRead> Iterator for DetectionStream<R> {
    type Item = Result<FrameBatch, PipelineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }

        let first = match self.pending.take() {
            Some(record) => record,
            None => match self.next_record() {
                Ok(Some(record)) => record,
                Ok(None) => return None,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            },
        };

        let mut batch = FrameBatch {
            frame_id: first.frame_id,
            timestamp_ms: first.timestamp_ms,
            records: vec![first],
        };
        loop {
            match self.next_record() {
                Ok(Some(record)) if record.frame_id == batch.frame_id => {
                    batch.records.push(record);
                }
                Ok(Some(record)) => {
                    self.pending = Some(record);
                    return Some(Ok(batch));
                }
                Ok(None) => return Some(Ok(batch)),
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(frame_id: u64, x: f64) -> String {
        format!(
            r#"{{"frame_id":{frame_id},"timestamp_ms":{},"x":{x},"y":5.0,"w":10.0,"h":20.0,"confidence":0.9}}"#,
            frame_id * 40
        )
    }

    fn collect(source: &str) -> (Vec<FrameBatch>, u64, Option<PipelineError>) {
        let mut stream = parse_stream(source.as_bytes());
        let mut batches = Vec::new();
        let mut error = None;
        for item in &mut stream {
            match item {
                Ok(batch) => batches.push(batch),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        (batches, stream.skipped_lines(), error)
    }

    #[test]
    fn empty_source_yields_no_batches() {
        let (batches, skipped, error) = collect("");
        assert!(batches.is_empty());
        assert_eq!(skipped, 0);
        assert!(error.is_none());
    }

    #[test]
    fn records_group_by_frame() {
        let source = [
            line(1, 0.0),
            line(1, 10.0),
            line(1, 20.0),
            line(2, 0.0),
            line(2, 10.0),
        ]
        .join("\n");
        let (batches, skipped, error) = collect(&source);
        assert!(error.is_none());
        assert_eq!(skipped, 0);
        let sizes: Vec<usize> = batches.iter().map(|b| b.records.len()).collect();
        assert_eq!(sizes, vec![3, 2]);
        assert_eq!(batches[0].frame_id, 1);
        assert_eq!(batches[0].timestamp_ms, 40);
        assert_eq!(batches[1].frame_id, 2);
    }

    #[test]
    fn malformed_lines_are_skipped_and_counted() {
        let bad_width = r#"{"frame_id":1,"timestamp_ms":40,"x":0.0,"y":5.0,"w":-3.0,"h":20.0,"confidence":0.9}"#;
        let source = format!("{}\n{}\nnot json at all\n{}", line(1, 0.0), bad_width, line(2, 0.0));
        let (batches, skipped, error) = collect(&source);
        assert!(error.is_none());
        assert_eq!(skipped, 2);
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].records.len(), 1);
    }

    #[test]
    fn blank_lines_are_ignored() {
        let source = format!("{}\n\n   \n{}", line(1, 0.0), line(1, 5.0));
        let (batches, skipped, error) = collect(&source);
        assert!(error.is_none());
        assert_eq!(skipped, 0);
        assert_eq!(batches.len(), 1);
        assert_eq!(batches[0].records.len(), 2);
    }

    #[test]
    fn decreasing_frame_id_is_fatal() {
        let source = [line(3, 0.0), line(2, 0.0)].join("\n");
        let (batches, _, error) = collect(&source);
        assert!(batches.is_empty());
        match error {
            Some(PipelineError::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn stream_fuses_after_fatal_error() {
        let source = [line(3, 0.0), line(2, 0.0), line(4, 0.0)].join("\n");
        let mut stream = parse_stream(source.as_bytes());
        assert!(matches!(stream.next(), Some(Err(_))));
        assert!(stream.next().is_none());
    }
}
