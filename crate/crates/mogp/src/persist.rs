//! Versioned JSON documents for campaign state.

use std::fs;
use std::io::Write;
use std::path::Path;

use mogp_core::CampaignState;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct DocumentRef<'a> {
    schema_version: u32,
    state: &'a CampaignState,
}

#[derive(Deserialize)]
struct Document {
    schema_version: u32,
    state: CampaignState,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

pub fn to_json(state: &CampaignState) -> Result<String> {
    serde_json::to_string_pretty(&DocumentRef {
        schema_version: SCHEMA_VERSION,
        state,
    })
    .map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json(text: &str) -> Result<CampaignState> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::Format(format!("corrupt state document: {e}")))?;
    match probe.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::Format(format!(
                "state document has schema_version {v}, expected {SCHEMA_VERSION}"
            )))
        }
        None => return Err(Error::Format("state document lacks schema_version".into())),
    }
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Format(format!("corrupt state document: {e}")))?;
    debug_assert_eq!(doc.schema_version, SCHEMA_VERSION);
    doc.state.settings.validate()?;
    Ok(doc.state)
}

/// Writes via a temporary sibling and a rename, so readers never see a
/// partial document.
pub fn save(state: &CampaignState, path: &Path) -> Result<()> {
    let text = to_json(state)?;
    let tmp = path.with_extension("json.tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<CampaignState> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mogp_core::CampaignSettings;

    #[test]
    fn round_trip_and_version_check() {
        let state = CampaignState::initialize(CampaignSettings::default()).unwrap();
        let text = to_json(&state).unwrap();
        assert!(text.contains("\"schema_version\": 1"));
        assert_eq!(from_json(&text).unwrap(), state);

        let truncated = &text[..text.len() / 2];
        assert!(matches!(from_json(truncated), Err(Error::Format(_))));
        let bumped = text.replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
        assert!(matches!(from_json(&bumped), Err(Error::Format(m)) if m.contains("99")));
        let missing = text.replacen("\"schema_version\": 1,", "", 1);
        assert!(matches!(from_json(&missing), Err(Error::Format(_))));
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let state = CampaignState::initialize(CampaignSettings::default()).unwrap();
        save(&state, &path).unwrap();
        assert_eq!(load(&path).unwrap(), state);
        assert!(matches!(load(&dir.path().join("none.json")), Err(Error::Io { .. })));
    }
}
