//! XES (IEEE 1849-2016) reading and writing.
//!
//! The reader understands the `log → trace → event` layout with the typed
//! attribute elements `string`, `date`, `int`, `float`, `boolean` and `id`.
//! Extension, global and classifier declarations are skipped. Nested
//! attributes are flattened away (only the outer value is kept), and
//! `list`/`container` or unknown elements produce warnings rather than
//! errors.
//!
//! XES has no null value, so the writer omits `Null` attributes.

use std::io::{self, BufRead, Write};

use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::{Reader, XmlVersion};

use super::{
    AttributeMap, AttributeValue, Event, EventLog, Ingested, Trace, ValueType, ACTIVITY_KEY,
    CASE_KEY, TIMESTAMP_KEY,
};
use crate::{Error, Result};

enum Frame {
    Log,
    Trace(AttributeMap, Vec<Event>),
    Event(AttributeMap),
    /// Subtree whose content is ignored: declarations, nested attributes,
    /// unknown elements.
    Skip,
}

struct XesParser {
    stack: Vec<Frame>,
    source_name: String,
    traces: Vec<Trace>,
    warnings: Vec<String>,
    position: u64,
}

/// Parses an XES document.
pub fn parse_xes<R: BufRead>(input: R) -> Result<Ingested> {
    let mut reader = Reader::from_reader(input);
    let mut parser = XesParser {
        stack: Vec::new(),
        source_name: String::new(),
        traces: Vec::new(),
        warnings: Vec::new(),
        position: 0,
    };
    let mut seen_log = false;
    let mut buf = Vec::new();
    loop {
        parser.position = reader.buffer_position();
        let event = reader.read_event_into(&mut buf).map_err(|e| Error::Xml {
            position: reader.error_position(),
            message: e.to_string(),
        })?;
        match event {
            XmlEvent::Start(start) => {
                let frame = parser.open(&start, &mut seen_log)?;
                parser.stack.push(frame);
            }
            XmlEvent::Empty(start) => {
                let frame = parser.open(&start, &mut seen_log)?;
                parser.close(frame)?;
            }
            XmlEvent::End(_) => {
                let frame = parser.stack.pop().ok_or_else(|| Error::Xml {
                    position: parser.position,
                    message: "unbalanced end tag".into(),
                })?;
                parser.close(frame)?;
            }
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !parser.stack.is_empty() {
        return Err(Error::Xml {
            position: reader.buffer_position(),
            message: "unexpected end of document inside an open element".into(),
        });
    }
    if !seen_log {
        return Err(Error::Xes {
            position: 0,
            message: "document has no <log> element".into(),
        });
    }
    Ok(Ingested {
        log: EventLog::new(parser.source_name, parser.traces),
        warnings: parser.warnings,
    })
}

impl XesParser {
    fn xes_error(&self, message: impl Into<String>) -> Error {
        Error::Xes {
            position: self.position,
            message: message.into(),
        }
    }

    fn open(&mut self, start: &BytesStart<'_>, seen_log: &mut bool) -> Result<Frame> {
        let name = start.local_name().as_ref().to_owned();
        let parent_is_owner = matches!(
            self.stack.last(),
            Some(Frame::Log | Frame::Trace(..) | Frame::Event(_))
        );
        match (name.as_str(), self.stack.last()) {
            ("log", None) => {
                *seen_log = true;
                Ok(Frame::Log)
            }
            (_, None) => Err(self.xes_error(format!("expected <log> root, found <{name}>"))),
            ("trace", Some(Frame::Log)) => Ok(Frame::Trace(AttributeMap::new(), Vec::new())),
            ("event", Some(Frame::Trace(..))) => Ok(Frame::Event(AttributeMap::new())),
            ("event", Some(Frame::Log)) => {
                self.warnings
                    .push(format!("byte {}: event outside a trace ignored", self.position));
                Ok(Frame::Skip)
            }
            ("extension" | "global" | "classifier", _) => Ok(Frame::Skip),
            (_, _) if parent_is_owner => {
                if let Some((key, value)) = self.attribute(&name, start)? {
                    match self.stack.last_mut() {
                        Some(Frame::Log) => {
                            if key == ACTIVITY_KEY {
                                if let AttributeValue::Text(s) = value {
                                    self.source_name = s;
                                }
                            }
                        }
                        Some(Frame::Trace(attrs, _)) | Some(Frame::Event(attrs)) => {
                            attrs.insert(key, value);
                        }
                        _ => unreachable!("parent_is_owner checked"),
                    }
                }
                Ok(Frame::Skip)
            }
            _ => Ok(Frame::Skip),
        }
    }

    /// Reads one typed attribute element. Returns `None` for elements that
    /// carry no scalar value.
    fn attribute(
        &mut self,
        element: &str,
        start: &BytesStart<'_>,
    ) -> Result<Option<(String, AttributeValue)>> {
        let mut key = None;
        let mut raw = None;
        for attr in start.attributes() {
            let attr = attr.map_err(|e| Error::Xml {
                position: self.position,
                message: e.to_string(),
            })?;
            let value = attr
                .normalized_value(XmlVersion::Implicit1_0)
                .map_err(|e| Error::Xml {
                    position: self.position,
                    message: e.to_string(),
                })?
                .into_owned();
            match attr.key.local_name().as_ref() {
                "key" => key = Some(value),
                "value" => raw = Some(value),
                _ => {}
            }
        }
        let Some(key) = key else {
            self.warnings.push(format!(
                "byte {}: <{element}> without key ignored",
                self.position
            ));
            return Ok(None);
        };
        let declared = match element {
            "string" | "id" => ValueType::Text,
            "date" => ValueType::Stamp,
            "int" => ValueType::Whole,
            "float" => ValueType::Real,
            "boolean" => ValueType::Flag,
            _ => {
                return Ok(match raw {
                    Some(raw) => {
                        self.warnings.push(format!(
                            "byte {}: unknown attribute type <{element}> for `{key}` kept as text",
                            self.position
                        ));
                        Some((key, AttributeValue::Text(raw)))
                    }
                    None => {
                        self.warnings.push(format!(
                            "byte {}: <{element}> attribute `{key}` has no scalar value; skipped",
                            self.position
                        ));
                        None
                    }
                });
            }
        };
        let raw = raw.ok_or_else(|| self.xes_error(format!("attribute `{key}` has no value")))?;
        let value = declared.parse_value(&raw).ok_or_else(|| {
            self.xes_error(format!("attribute `{key}`: `{raw}` is not a valid {declared}"))
        })?;
        Ok(Some((key, value)))
    }

    fn close(&mut self, frame: Frame) -> Result<()> {
        match frame {
            Frame::Event(attrs) => {
                let trace_index = self.traces.len();
                let Some(Frame::Trace(_, events)) = self.stack.last_mut() else {
                    unreachable!("events only open inside traces");
                };
                let event_index = events.len();
                for mandatory in [ACTIVITY_KEY, TIMESTAMP_KEY] {
                    let ok = match (mandatory, attrs.get(mandatory)) {
                        (ACTIVITY_KEY, Some(AttributeValue::Text(_))) => true,
                        (TIMESTAMP_KEY, Some(AttributeValue::Stamp(_))) => true,
                        _ => false,
                    };
                    if !ok {
                        return Err(Error::MissingMandatory {
                            trace: trace_index,
                            event: Some(event_index),
                            attribute: mandatory.to_owned(),
                        });
                    }
                }
                events.push(Event { attributes: attrs });
            }
            Frame::Trace(mut attrs, events) => {
                let case_id = match attrs.remove(ACTIVITY_KEY) {
                    Some(AttributeValue::Text(id)) => id,
                    _ => {
                        return Err(Error::MissingMandatory {
                            trace: self.traces.len(),
                            event: None,
                            attribute: ACTIVITY_KEY.to_owned(),
                        })
                    }
                };
                let mut trace = Trace::new(case_id, events);
                trace.attributes = attrs;
                self.traces.push(trace);
            }
            Frame::Log | Frame::Skip => {}
        }
        Ok(())
    }
}

/// Serializes a log to an XES document.
pub fn serialize_xes(log: &EventLog) -> Vec<u8> {
    let mut out = Vec::new();
    write_xes(log, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn write_xes<W: Write>(log: &EventLog, out: W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<log xes.version="1849-2016" xes.features="" xmlns="http://www.xes-standard.org/">"#
    )?;
    writeln!(
        out,
        r#"  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>"#
    )?;
    writeln!(
        out,
        r#"  <extension name="Time" prefix="time" uri="http://www.xes-standard.org/time.xesext"/>"#
    )?;
    write_attribute(&mut out, 1, ACTIVITY_KEY, &log.source_name.as_str().into())?;
    for trace in &log.traces {
        writeln!(out, "  <trace>")?;
        write_attribute(&mut out, 2, ACTIVITY_KEY, &trace.case_id.as_str().into())?;
        for (key, value) in &trace.attributes {
            if key != ACTIVITY_KEY {
                write_attribute(&mut out, 2, key, value)?;
            }
        }
        for event in &trace.events {
            writeln!(out, "    <event>")?;
            for (key, value) in &event.attributes {
                if key != CASE_KEY {
                    write_attribute(&mut out, 3, key, value)?;
                }
            }
            writeln!(out, "    </event>")?;
        }
        writeln!(out, "  </trace>")?;
    }
    writeln!(out, "</log>")?;
    out.flush()
}

fn write_attribute<W: Write>(
    out: &mut W,
    depth: usize,
    key: &str,
    value: &AttributeValue,
) -> io::Result<()> {
    let element = match value {
        AttributeValue::Text(_) => "string",
        AttributeValue::Stamp(_) => "date",
        AttributeValue::Whole(_) => "int",
        AttributeValue::Real(_) => "float",
        AttributeValue::Flag(_) => "boolean",
        AttributeValue::Null => return Ok(()),
    };
    writeln!(
        out,
        r#"{:indent$}<{element} key="{}" value="{}"/>"#,
        "",
        escape(key),
        escape(&value.to_string()),
        indent = depth * 2
    )
}

fn escape(text: &str) -> String {
    let mut escaped = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => escaped.push_str("&amp;"),
            '<' => escaped.push_str("&lt;"),
            '>' => escaped.push_str("&gt;"),
            '"' => escaped.push_str("&quot;"),
            '\'' => escaped.push_str("&apos;"),
            '\n' => escaped.push_str("&#10;"),
            '\r' => escaped.push_str("&#13;"),
            '\t' => escaped.push_str("&#9;"),
            c => escaped.push(c),
        }
    }
    escaped
}
