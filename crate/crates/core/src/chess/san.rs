//! Standard algebraic notation.

use super::movegen::generate_legal_moves;
use super::position::Position;
use super::types::{Move, PieceKind, Square};

/// SAN for a legal move, including `+`/`#` suffixes.
pub fn to_san(pos: &Position, m: Move) -> String {
    let mut out = String::new();
    let piece = pos.piece_at(m.from).expect("SAN of move from empty square");
    if m.is_castle() {
        out.push_str(if m.to.file() == 6 { "O-O" } else { "O-O-O" });
    } else if piece.kind == PieceKind::Pawn {
        if m.is_capture() {
            out.push((b'a' + m.from.file()) as char);
            out.push('x');
        }
        out.push_str(&m.to.to_string());
        if let Some(p) = m.promotion {
            out.push('=');
            out.push(p.to_char().to_ascii_uppercase());
        }
    } else {
        out.push(piece.kind.to_char().to_ascii_uppercase());
        let rivals: Vec<Move> = generate_legal_moves(pos)
            .into_iter()
            .filter(|o| {
                o.to == m.to && o.from != m.from && pos.piece_at(o.from).map(|p| p.kind) == Some(piece.kind)
            })
            .collect();
        if !rivals.is_empty() {
            let same_file = rivals.iter().any(|o| o.from.file() == m.from.file());
            let same_rank = rivals.iter().any(|o| o.from.rank() == m.from.rank());
            if !same_file {
                out.push((b'a' + m.from.file()) as char);
            } else if !same_rank {
                out.push((b'1' + m.from.rank()) as char);
            } else {
                out.push_str(&m.from.to_string());
            }
        }
        if m.is_capture() {
            out.push('x');
        }
        out.push_str(&m.to.to_string());
    }
    let next = pos.apply(m);
    if next.in_check() {
        if generate_legal_moves(&next).is_empty() {
            out.push('#');
        } else {
            out.push('+');
        }
    }
    out
}

/// Resolves SAN text against the legal moves of `pos`. Tolerates missing or
/// extra check marks and annotation glyphs.
pub fn parse_san(pos: &Position, text: &str) -> Option<Move> {
    let t = text.trim_end_matches(['+', '#', '!', '?']);
    let legal = generate_legal_moves(pos);
    if t == "O-O" || t == "0-0" {
        return legal.into_iter().find(|m| m.is_castle() && m.to.file() == 6);
    }
    if t == "O-O-O" || t == "0-0-0" {
        return legal.into_iter().find(|m| m.is_castle() && m.to.file() == 2);
    }

    let (body, promotion) = match t.find('=') {
        Some(i) => (&t[..i], Some(PieceKind::from_char(t[i + 1..].chars().next()?)?)),
        None => (t, None),
    };
    let mut chars: Vec<char> = body.chars().filter(|&c| c != 'x' && c != '-').collect();
    let kind = match chars.first() {
        Some(c) if c.is_ascii_uppercase() => {
            let k = PieceKind::from_char(*c)?;
            chars.remove(0);
            k
        }
        _ => PieceKind::Pawn,
    };
    if chars.len() < 2 {
        return None;
    }
    let dest: String = chars[chars.len() - 2..].iter().collect();
    let to: Square = dest.parse().ok()?;
    let hint = &chars[..chars.len() - 2];
    let file_hint = hint.iter().find(|c| ('a'..='h').contains(c)).map(|&c| c as u8 - b'a');
    let rank_hint = hint.iter().find(|c| ('1'..='8').contains(c)).map(|&c| c as u8 - b'1');

    let mut found = legal.into_iter().filter(|m| {
        m.to == to
            && m.promotion == promotion
            && pos.piece_at(m.from).map(|p| p.kind) == Some(kind)
            && !m.is_castle()
            && file_hint.is_none_or(|f| m.from.file() == f)
            && rank_hint.is_none_or(|r| m.from.rank() == r)
    });
    let first = found.next()?;
    if found.next().is_some() {
        return None;
    }
    Some(first)
}
