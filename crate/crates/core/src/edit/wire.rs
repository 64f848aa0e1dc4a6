//! JSON form of an edit: `{kind, tokenIndex, branchSide?, params}`.
//!
//! `tokenIndex` is the index of the anchor's first token in the program's
//! canonical token sequence. `branchSide` is `"left"`, `"right"` or, for an
//! insertion into a CSG list, the integer slot. Parameters use the token
//! spelling of [`crate::dsl::Token`].

use serde::{Deserialize, Serialize};

use super::{anchor_from_token, token_anchor, BranchSide, EditError, EditKind, EditOp};
use crate::dsl::{Program, Token};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireSide {
    Named(String),
    Slot(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireEdit {
    pub kind: String,
    #[serde(rename = "tokenIndex")]
    pub token_index: usize,
    #[serde(rename = "branchSide", default, skip_serializing_if = "Option::is_none")]
    pub branch_side: Option<WireSide>,
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("unknown edit kind `{0}`")]
    Kind(String),
    #[error("bad branch side {0:?}")]
    Side(WireSide),
    #[error("{0}")]
    Token(String),
    #[error(transparent)]
    Edit(#[from] EditError),
}

pub fn to_wire(program: &Program, op: &EditOp) -> Result<WireEdit, EditError> {
    Ok(WireEdit {
        kind: op.kind.to_string(),
        token_index: token_anchor(program, op.anchor)?,
        branch_side: op.side.map(|s| match s {
            BranchSide::Left => WireSide::Named("left".into()),
            BranchSide::Right => WireSide::Named("right".into()),
            BranchSide::Slot(i) => WireSide::Slot(i),
        }),
        params: op.params.iter().map(Token::to_string).collect(),
    })
}

/// Resolves a wire edit against `program`. Only the anchor is checked here;
/// parameters are checked when the edit is applied.
pub fn from_wire(program: &Program, w: &WireEdit) -> Result<EditOp, WireError> {
    let kind: EditKind = w.kind.parse().map_err(|_| WireError::Kind(w.kind.clone()))?;
    let anchor = anchor_from_token(program, w.token_index, kind)?;
    let side = match &w.branch_side {
        None => None,
        Some(WireSide::Slot(i)) => Some(BranchSide::Slot(*i)),
        Some(WireSide::Named(s)) if s.eq_ignore_ascii_case("left") => Some(BranchSide::Left),
        Some(WireSide::Named(s)) if s.eq_ignore_ascii_case("right") => Some(BranchSide::Right),
        Some(other) => return Err(WireError::Side(other.clone())),
    };
    let params = w.params.iter().map(|s| s.parse::<Token>()).collect::<Result<Vec<_>, _>>().map_err(WireError::Token)?;
    Ok(EditOp::new(kind, anchor, side, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_text, Domain, Quant};
    use crate::edit::apply_edit;

    #[test]
    fn wire_round_trip() {
        let p = parse_text("Union(Prim(square),Move(0.25,0)(Prim(circle)))", Domain::Layout, Quant::default()).unwrap();
        let json = r#"{"kind":"MP","tokenIndex":3,"params":["q16","q16"]}"#;
        let w: WireEdit = serde_json::from_str(json).unwrap();
        let op = from_wire(&p, &w).unwrap();
        assert_eq!(to_wire(&p, &op).unwrap(), w);
        let q = apply_edit(&p, &op).unwrap();
        assert_eq!(q.to_text(), "Union(Prim(square),Move(0,0)(Prim(circle)))");
        assert_eq!(serde_json::to_string(&w).unwrap(), json);
    }

    #[test]
    fn sides_serialize_as_names_or_slots() {
        let w = WireEdit {
            kind: "AC".into(),
            token_index: 0,
            branch_side: Some(WireSide::Slot(2)),
            params: vec!["Union".into(), "Prim".into(), "circle".into()],
        };
        assert!(serde_json::to_string(&w).unwrap().contains(r#""branchSide":2"#));
        let named: WireEdit =
            serde_json::from_str(r#"{"kind":"AC","tokenIndex":0,"branchSide":"left","params":[]}"#).unwrap();
        assert_eq!(named.branch_side, Some(WireSide::Named("left".into())));
    }

    #[test]
    fn bad_anchor_is_rejected() {
        let p = parse_text("Prim(square)", Domain::Layout, Quant::default()).unwrap();
        let w = WireEdit { kind: "RT".into(), token_index: 0, branch_side: None, params: vec![] };
        assert!(matches!(from_wire(&p, &w), Err(WireError::Edit(EditError::InvalidAnchor { .. }))));
        let w = WireEdit { kind: "MP".into(), token_index: 1, branch_side: None, params: vec![] };
        assert!(matches!(
            from_wire(&p, &w),
            Err(WireError::Edit(EditError::NoNodeAtToken { index: 1, .. }))
        ));
    }
}
