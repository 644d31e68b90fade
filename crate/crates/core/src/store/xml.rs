//! `<articles>` XML export and import.

use std::fs;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::{Reader, XmlVersion};

use super::{
    format_timestamp, parse_timestamp, IndexEntry, MemoryStore, RecordStore, StorageError,
};
use crate::model::{Field, FieldStatus, FieldValue, MetadataRecord};

/// Escapes markup characters and writes every C0 control as a character
/// reference so that attribute normalization cannot alter it.
fn escape(s: &str) -> Result<String, StorageError> {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\0' => return Err(StorageError::Xml("NUL cannot be written to XML".into())),
            c if (c as u32) < 0x20 => out.push_str(&format!("&#{};", c as u32)),
            c => out.push(c),
        }
    }
    Ok(out)
}

pub fn render_xml(entries: &[IndexEntry]) -> Result<String, StorageError> {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<articles>\n");
    for e in entries {
        out.push_str(&format!(
            "  <article id=\"{}\" source=\"{}\" indexed_at=\"{}\">\n",
            escape(&e.doc_id)?,
            escape(&e.source_path)?,
            format_timestamp(&e.indexed_at)
        ));
        for (field, value) in e.record.iter() {
            let name = field.name();
            out.push_str(&format!(
                "    <{name} status=\"{}\">{}</{name}>\n",
                value.status.as_str(),
                escape(&value.value)?
            ));
        }
        out.push_str("  </article>\n");
    }
    out.push_str("</articles>\n");
    Ok(out)
}

pub fn export_xml(store: &dyn RecordStore, path: &Path) -> Result<(), StorageError> {
    let xml = render_xml(&store.entries()?)?;
    fs::write(path, xml).map_err(|source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn import_xml(path: &Path) -> Result<MemoryStore, StorageError> {
    let content = fs::read_to_string(path).map_err(|source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_xml(&content)
}

fn xml_err(e: impl ToString) -> StorageError {
    StorageError::Xml(e.to_string())
}

fn attr(start: &BytesStart<'_>, name: &str) -> Result<Option<String>, StorageError> {
    for a in start.attributes() {
        let a = a.map_err(xml_err)?;
        if a.key.as_ref() == name {
            return Ok(Some(
                a.normalized_value(XmlVersion::Implicit1_0)
                    .map_err(xml_err)?
                    .into_owned(),
            ));
        }
    }
    Ok(None)
}

fn required_attr(start: &BytesStart<'_>, name: &str) -> Result<String, StorageError> {
    attr(start, name)?.ok_or_else(|| xml_err(format!("missing attribute `{name}`")))
}

struct PartialArticle {
    id: String,
    source: String,
    indexed_at: String,
    record: MetadataRecord,
    seen: [bool; 6],
}

struct OpenField {
    field: Field,
    status: FieldStatus,
    text: String,
}

fn resolve_entity(name: &str) -> Option<char> {
    match name {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        _ => None,
    }
}

pub fn parse_xml(content: &str) -> Result<MemoryStore, StorageError> {
    let mut reader = Reader::from_str(content);
    reader.config_mut().trim_text(false);
    let mut store = MemoryStore::new();
    let mut seen_root = false;
    let mut closed_root = false;
    let mut article: Option<PartialArticle> = None;
    let mut open: Option<OpenField> = None;

    loop {
        let event = reader.read_event().map_err(xml_err)?;
        match event {
            Event::Start(ref start) | Event::Empty(ref start) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = start.name().as_ref().to_string();
                match (name.as_str(), seen_root, &article, &open) {
                    ("articles", false, None, None) => {
                        seen_root = true;
                        closed_root = is_empty;
                    }
                    ("article", true, None, None) if !closed_root => {
                        let id = required_attr(start, "id")?;
                        article = Some(PartialArticle {
                            record: MetadataRecord::new(id.clone()),
                            id,
                            source: attr(start, "source")?.unwrap_or_default(),
                            indexed_at: required_attr(start, "indexed_at")?,
                            seen: [false; 6],
                        });
                        if is_empty {
                            return Err(xml_err("article without fields"));
                        }
                    }
                    (field_name, true, Some(_), None) => {
                        let field: Field = field_name.parse().map_err(xml_err)?;
                        let status: FieldStatus =
                            required_attr(start, "status")?.parse().map_err(xml_err)?;
                        let f = OpenField {
                            field,
                            status,
                            text: String::new(),
                        };
                        if is_empty {
                            close_field(article.as_mut().expect("article is open"), f)?;
                        } else {
                            open = Some(f);
                        }
                    }
                    _ => return Err(xml_err(format!("unexpected element <{name}>"))),
                }
            }
            Event::Text(text) => {
                if let Some(f) = open.as_mut() {
                    f.text.push_str(&text.xml10_content());
                } else if !text.trim().is_empty() {
                    return Err(xml_err(format!("stray text `{}`", text.trim())));
                }
            }
            Event::CData(data) => {
                let f = open.as_mut().ok_or_else(|| xml_err("stray CDATA"))?;
                f.text.push_str(&data.xml10_content());
            }
            Event::GeneralRef(r) => {
                let f = open
                    .as_mut()
                    .ok_or_else(|| xml_err("stray entity reference"))?;
                let c = match r.resolve_char_ref().map_err(xml_err)? {
                    Some(c) => c,
                    None => resolve_entity(&r)
                        .ok_or_else(|| xml_err(format!("unknown entity `&{};`", &*r)))?,
                };
                f.text.push(c);
            }
            Event::End(end) => {
                let name = end.name().as_ref().to_string();
                if let Some(f) = open.take() {
                    close_field(article.as_mut().expect("article is open"), f)?;
                } else if let Some(a) = article.take() {
                    debug_assert_eq!(name, "article");
                    store.put(finish_article(a)?)?;
                } else {
                    closed_root = true;
                    if name != "articles" {
                        return Err(xml_err(format!("unexpected </{name}>")));
                    }
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
    if !closed_root || article.is_some() || open.is_some() {
        return Err(xml_err("unexpected end of document"));
    }
    Ok(store)
}

fn close_field(article: &mut PartialArticle, f: OpenField) -> Result<(), StorageError> {
    let i = f.field.index();
    if article.seen[i] {
        return Err(xml_err(format!(
            "duplicate <{}> in article `{}`",
            f.field, article.id
        )));
    }
    article.seen[i] = true;
    article.record.set(
        f.field,
        FieldValue {
            value: f.text,
            status: f.status,
        },
    );
    Ok(())
}

fn finish_article(a: PartialArticle) -> Result<IndexEntry, StorageError> {
    if let Some(i) = a.seen.iter().position(|s| !s) {
        return Err(xml_err(format!(
            "article `{}` lacks <{}>",
            a.id,
            Field::ALL[i]
        )));
    }
    Ok(IndexEntry {
        indexed_at: parse_timestamp(&a.id, &a.indexed_at)?,
        doc_id: a.id,
        record: a.record,
        source_path: a.source,
    })
}
