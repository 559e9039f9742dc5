use std::fmt;

use super::types::{CastlingRights, Color, Move, Piece, PieceKind, Square};
use super::zobrist::KEYS;
use super::{FenError, IllegalMove};

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// Complete game state. Cheap to copy; moves are applied on copies.
#[derive(Clone, PartialEq, Eq)]
pub struct Position {
    board: [Option<Piece>; 64],
    side_to_move: Color,
    castling: CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
    kings: [Square; 2],
    hash: u64,
}

impl Position {
    pub fn startpos() -> Position {
        Position::from_fen(START_FEN).expect("start FEN is valid")
    }

    pub fn from_fen(text: &str) -> Result<Position, FenError> {
        parse_fen(text)
    }

    #[inline]
    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    #[inline]
    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    #[inline]
    pub fn castling_rights(&self) -> CastlingRights {
        self.castling
    }

    #[inline]
    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    #[inline]
    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    #[inline]
    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    #[inline]
    pub fn king_square(&self, color: Color) -> Square {
        self.kings[color.index()]
    }

    /// Zobrist hash over placement, side, castling and a capturable en-passant
    /// square. Move counters are not part of the key.
    #[inline]
    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Occupied squares with their pieces, a1 first.
    pub fn pieces(&self) -> impl Iterator<Item = (Square, Piece)> + '_ {
        self.board
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (Square::new(i as u8), p)))
    }

    pub fn piece_count(&self) -> usize {
        self.board.iter().filter(|p| p.is_some()).count()
    }

    pub fn count(&self, color: Color, kind: PieceKind) -> usize {
        self.board
            .iter()
            .filter(|p| **p == Some(Piece::new(color, kind)))
            .count()
    }

    pub fn in_check(&self) -> bool {
        let us = self.side_to_move;
        self.is_attacked(self.kings[us.index()], us.opposite())
    }

    /// True when `by` attacks `sq` (pins ignored).
    pub fn is_attacked(&self, sq: Square, by: Color) -> bool {
        let s = sq.index();
        // A pawn of `by` attacks `sq` from one rank behind it (from `by`'s view).
        let pawn_sources = match by {
            Color::White => attacks::PAWN_ATTACKS[Color::Black.index()][s],
            Color::Black => attacks::PAWN_ATTACKS[Color::White.index()][s],
        };
        if self.any_on(pawn_sources, Piece::new(by, PieceKind::Pawn)) {
            return true;
        }
        if self.any_on(attacks::KNIGHT[s], Piece::new(by, PieceKind::Knight)) {
            return true;
        }
        if self.any_on(attacks::KING[s], Piece::new(by, PieceKind::King)) {
            return true;
        }
        for &(df, dr) in &attacks::ROOK_DIRS {
            if let Some(p) = self.first_piece_on_ray(sq, df, dr) {
                if p.color == by && matches!(p.kind, PieceKind::Rook | PieceKind::Queen) {
                    return true;
                }
            }
        }
        for &(df, dr) in &attacks::BISHOP_DIRS {
            if let Some(p) = self.first_piece_on_ray(sq, df, dr) {
                if p.color == by && matches!(p.kind, PieceKind::Bishop | PieceKind::Queen) {
                    return true;
                }
            }
        }
        false
    }

    #[inline]
    fn any_on(&self, mut set: u64, piece: Piece) -> bool {
        while set != 0 {
            let i = set.trailing_zeros() as usize;
            if self.board[i] == Some(piece) {
                return true;
            }
            set &= set - 1;
        }
        false
    }

    #[inline]
    fn first_piece_on_ray(&self, from: Square, df: i8, dr: i8) -> Option<Piece> {
        let mut cur = from;
        while let Some(next) = cur.offset(df, dr) {
            if let Some(p) = self.board[next.index()] {
                return Some(p);
            }
            cur = next;
        }
        None
    }

    /// Applies `m` after checking it is legal.
    pub fn make_move(&self, m: Move) -> Result<Position, IllegalMove> {
        let legal = super::generate_legal_moves(self);
        match legal
            .iter()
            .find(|l| l.from == m.from && l.to == m.to && l.promotion == m.promotion)
        {
            Some(&found) => Ok(self.apply(found)),
            None => Err(IllegalMove {
                mv: m.to_string(),
                fen: self.to_fen(),
            }),
        }
    }

    /// Parses long algebraic text and plays it if legal.
    pub fn make_uci_move(&self, text: &str) -> Result<Position, IllegalMove> {
        let m = self.parse_uci_move(text).ok_or_else(|| IllegalMove {
            mv: text.to_string(),
            fen: self.to_fen(),
        })?;
        Ok(self.apply(m))
    }

    /// Resolves long algebraic text against the legal moves of this position.
    pub fn parse_uci_move(&self, text: &str) -> Option<Move> {
        let text = text.trim();
        if text.len() != 4 && text.len() != 5 {
            return None;
        }
        let from: Square = text.get(0..2)?.parse().ok()?;
        let to: Square = text.get(2..4)?.parse().ok()?;
        let promotion = match text.get(4..5) {
            Some(c) => Some(PieceKind::from_char(c.chars().next()?)?),
            None => None,
        };
        super::generate_legal_moves(self)
            .into_iter()
            .find(|m| m.from == from && m.to == to && m.promotion == promotion)
    }

    /// Applies a move known to be legal (taken from the move generator).
    pub fn apply(&self, m: Move) -> Position {
        let mut next = self.clone();
        next.apply_in_place(m);
        next
    }

    fn apply_in_place(&mut self, m: Move) {
        let us = self.side_to_move;
        let them = us.opposite();
        let moving = self.board[m.from.index()].expect("move from an empty square");

        // Remove stale keys.
        self.hash ^= KEYS.castling[self.castling.bits() as usize];
        if let Some(ep) = self.en_passant {
            if self.ep_capturable(ep) {
                self.hash ^= KEYS.en_passant_file[ep.file() as usize];
            }
        }

        let mut captured = self.board[m.to.index()];
        if m.is_en_passant() {
            let victim_sq = Square::from_coords(m.to.file(), m.from.rank());
            captured = self.board[victim_sq.index()];
            self.remove_piece(victim_sq);
        } else if captured.is_some() {
            self.remove_piece(m.to);
        }

        self.remove_piece(m.from);
        let placed = match m.promotion {
            Some(kind) => Piece::new(us, kind),
            None => moving,
        };
        self.put_piece(m.to, placed);

        if m.is_castle() {
            let rank = m.from.rank();
            let (rook_from, rook_to) = if m.to.file() == 6 {
                (Square::from_coords(7, rank), Square::from_coords(5, rank))
            } else {
                (Square::from_coords(0, rank), Square::from_coords(3, rank))
            };
            let rook = self.board[rook_from.index()].expect("castling rook present");
            self.remove_piece(rook_from);
            self.put_piece(rook_to, rook);
        }

        if moving.kind == PieceKind::King {
            self.kings[us.index()] = m.to;
            self.castling.remove(CastlingRights::kingside(us));
            self.castling.remove(CastlingRights::queenside(us));
        }
        for sq in [m.from, m.to] {
            match sq.index() {
                0 => self.castling.remove(CastlingRights::WHITE_QUEEN),
                7 => self.castling.remove(CastlingRights::WHITE_KING),
                56 => self.castling.remove(CastlingRights::BLACK_QUEEN),
                63 => self.castling.remove(CastlingRights::BLACK_KING),
                _ => {}
            }
        }

        self.en_passant = if m.is_double_push() {
            Some(Square::from_coords(
                m.from.file(),
                (m.from.rank() + m.to.rank()) / 2,
            ))
        } else {
            None
        };

        if moving.kind == PieceKind::Pawn || captured.is_some() {
            self.halfmove_clock = 0;
        } else {
            self.halfmove_clock += 1;
        }
        if us == Color::Black {
            self.fullmove_number += 1;
        }
        self.side_to_move = them;
        self.hash ^= KEYS.side;
        self.hash ^= KEYS.castling[self.castling.bits() as usize];
        if let Some(ep) = self.en_passant {
            if self.ep_capturable(ep) {
                self.hash ^= KEYS.en_passant_file[ep.file() as usize];
            }
        }
    }

    #[inline]
    fn remove_piece(&mut self, sq: Square) {
        if let Some(p) = self.board[sq.index()].take() {
            self.hash ^= KEYS.pieces[p.index()][sq.index()];
        }
    }

    #[inline]
    fn put_piece(&mut self, sq: Square, p: Piece) {
        debug_assert!(self.board[sq.index()].is_none());
        self.board[sq.index()] = Some(p);
        self.hash ^= KEYS.pieces[p.index()][sq.index()];
    }

    /// Whether a pawn of the side to move stands ready to capture on `ep`.
    fn ep_capturable(&self, ep: Square) -> bool {
        let us = self.side_to_move;
        let pawn = Piece::new(us, PieceKind::Pawn);
        // Our capturing pawns sit where an enemy pawn on `ep` would attack.
        let sources = attacks::PAWN_ATTACKS[us.opposite().index()][ep.index()];
        self.any_on(sources, pawn)
    }

    fn compute_hash(&self) -> u64 {
        let mut h = 0u64;
        for (sq, p) in self.pieces() {
            h ^= KEYS.pieces[p.index()][sq.index()];
        }
        if self.side_to_move == Color::Black {
            h ^= KEYS.side;
        }
        h ^= KEYS.castling[self.castling.bits() as usize];
        if let Some(ep) = self.en_passant {
            if self.ep_capturable(ep) {
                h ^= KEYS.en_passant_file[ep.file() as usize];
            }
        }
        h
    }

    /// Color-flipped vertical mirror: pieces recolored, ranks mirrored, side
    /// to move and castling rights swapped.
    pub fn mirrored(&self) -> Position {
        let mut board = [None; 64];
        for (sq, p) in self.pieces() {
            board[sq.flip().index()] = Some(Piece::new(p.color.opposite(), p.kind));
        }
        let mut pos = Position {
            board,
            side_to_move: self.side_to_move.opposite(),
            castling: self.castling.swapped(),
            en_passant: self.en_passant.map(Square::flip),
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
            kings: [
                self.kings[Color::Black.index()].flip(),
                self.kings[Color::White.index()].flip(),
            ],
            hash: 0,
        };
        pos.hash = pos.compute_hash();
        pos
    }

    pub fn to_fen(&self) -> String {
        let mut out = String::with_capacity(90);
        for rank in (0..8).rev() {
            let mut empty = 0;
            for file in 0..8 {
                match self.board[Square::from_coords(file, rank).index()] {
                    Some(p) => {
                        if empty > 0 {
                            out.push(char::from(b'0' + empty));
                            empty = 0;
                        }
                        out.push(p.to_char());
                    }
                    None => empty += 1,
                }
            }
            if empty > 0 {
                out.push(char::from(b'0' + empty));
            }
            if rank > 0 {
                out.push('/');
            }
        }
        out.push(' ');
        out.push(match self.side_to_move {
            Color::White => 'w',
            Color::Black => 'b',
        });
        out.push(' ');
        if self.castling.bits() == 0 {
            out.push('-');
        } else {
            for (flag, c) in [
                (CastlingRights::WHITE_KING, 'K'),
                (CastlingRights::WHITE_QUEEN, 'Q'),
                (CastlingRights::BLACK_KING, 'k'),
                (CastlingRights::BLACK_QUEEN, 'q'),
            ] {
                if self.castling.has(flag) {
                    out.push(c);
                }
            }
        }
        out.push(' ');
        match self.en_passant {
            Some(sq) => out.push_str(&sq.to_string()),
            None => out.push('-'),
        }
        out.push_str(&format!(" {} {}", self.halfmove_clock, self.fullmove_number));
        out
    }

    pub(crate) fn board(&self) -> &[Option<Piece>; 64] {
        &self.board
    }
}

impl Default for Position {
    fn default() -> Self {
        Position::startpos()
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position({})", self.to_fen())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rank in (0..8).rev() {
            for file in 0..8 {
                let c = self.board[Square::from_coords(file, rank).index()]
                    .map(Piece::to_char)
                    .unwrap_or('.');
                write!(f, "{c}")?;
            }
            writeln!(f)?;
        }
        write!(f, "{}", self.to_fen())
    }
}

/// Parses a FEN record. The two counter fields may be omitted (they default
/// to `0 1`); castling and en-passant fields may be omitted together.
pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 6 || fields.len() == 3 || fields.len() == 5 {
        return Err(FenError::FieldCount(fields.len()));
    }

    let mut board = [None; 64];
    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(FenError::Placement(format!(
            "expected 8 ranks, found {}",
            ranks.len()
        )));
    }
    for (i, row) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                if !(1..=8).contains(&d) {
                    return Err(FenError::Placement(format!("bad digit '{c}'")));
                }
                file += d as u8;
            } else {
                let p = Piece::from_char(c)
                    .ok_or_else(|| FenError::Placement(format!("unknown piece '{c}'")))?;
                if file >= 8 {
                    return Err(FenError::Placement(format!("rank {} too long", rank + 1)));
                }
                board[Square::from_coords(file, rank).index()] = Some(p);
                file += 1;
            }
            if file > 8 {
                return Err(FenError::Placement(format!("rank {} too long", rank + 1)));
            }
        }
        if file != 8 {
            return Err(FenError::Placement(format!("rank {} too short", rank + 1)));
        }
    }

    let side_to_move = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::SideToMove(other.to_string())),
    };

    let mut kings = [None, None];
    for (i, p) in board.iter().enumerate() {
        if let Some(p) = p {
            if p.kind == PieceKind::King {
                if kings[p.color.index()].is_some() {
                    return Err(FenError::TooManyKings(p.color));
                }
                kings[p.color.index()] = Some(Square::new(i as u8));
            }
            if p.kind == PieceKind::Pawn && !(8..56).contains(&i) {
                return Err(FenError::PawnOnBackRank(Square::new(i as u8)));
            }
        }
    }
    let white_king = kings[0].ok_or(FenError::MissingKing(Color::White))?;
    let black_king = kings[1].ok_or(FenError::MissingKing(Color::Black))?;

    let mut castling = CastlingRights::NONE;
    let castle_field = fields.get(2).copied().unwrap_or("-");
    if castle_field != "-" {
        for c in castle_field.chars() {
            let flag = match c {
                'K' => CastlingRights::WHITE_KING,
                'Q' => CastlingRights::WHITE_QUEEN,
                'k' => CastlingRights::BLACK_KING,
                'q' => CastlingRights::BLACK_QUEEN,
                _ => return Err(FenError::Castling(castle_field.to_string())),
            };
            castling.insert(flag);
        }
    }
    // Drop rights whose king or rook is not on its home square.
    let home = |sq: u8, piece: Piece| board[sq as usize] == Some(piece);
    let wk = Piece::new(Color::White, PieceKind::King);
    let wr = Piece::new(Color::White, PieceKind::Rook);
    let bk = Piece::new(Color::Black, PieceKind::King);
    let br = Piece::new(Color::Black, PieceKind::Rook);
    if !(home(4, wk) && home(7, wr)) {
        castling.remove(CastlingRights::WHITE_KING);
    }
    if !(home(4, wk) && home(0, wr)) {
        castling.remove(CastlingRights::WHITE_QUEEN);
    }
    if !(home(60, bk) && home(63, br)) {
        castling.remove(CastlingRights::BLACK_KING);
    }
    if !(home(60, bk) && home(56, br)) {
        castling.remove(CastlingRights::BLACK_QUEEN);
    }

    let ep_field = fields.get(3).copied().unwrap_or("-");
    let en_passant = if ep_field == "-" {
        None
    } else {
        let sq: Square = ep_field
            .parse()
            .map_err(|_| FenError::EnPassant(ep_field.to_string()))?;
        let (expected_rank, pawn_rank, pusher) = match side_to_move {
            Color::White => (5, 4, Color::Black),
            Color::Black => (2, 3, Color::White),
        };
        if sq.rank() != expected_rank {
            return Err(FenError::EnPassant(ep_field.to_string()));
        }
        let pawn_sq = Square::from_coords(sq.file(), pawn_rank);
        if board[pawn_sq.index()] != Some(Piece::new(pusher, PieceKind::Pawn))
            || board[sq.index()].is_some()
        {
            return Err(FenError::EnPassant(ep_field.to_string()));
        }
        Some(sq)
    };

    let halfmove_clock = match fields.get(4) {
        Some(s) => s
            .parse::<u32>()
            .map_err(|_| FenError::Counter(s.to_string()))?,
        None => 0,
    };
    let fullmove_number = match fields.get(5) {
        Some(s) => {
            let n = s
                .parse::<u32>()
                .map_err(|_| FenError::Counter(s.to_string()))?;
            if n == 0 {
                return Err(FenError::Counter(s.to_string()));
            }
            n
        }
        None => 1,
    };

    let mut pos = Position {
        board,
        side_to_move,
        castling,
        en_passant,
        halfmove_clock,
        fullmove_number,
        kings: [white_king, black_king],
        hash: 0,
    };
    let them = side_to_move.opposite();
    if pos.is_attacked(pos.kings[them.index()], side_to_move) {
        return Err(FenError::OpponentInCheck);
    }
    pos.hash = pos.compute_hash();
    Ok(pos)
}

/// Precomputed leaper tables and slider directions.
pub(crate) mod attacks {
    pub const ROOK_DIRS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    pub const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
    pub const QUEEN_DIRS: [(i8, i8); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];
    const KNIGHT_JUMPS: [(i8, i8); 8] = [
        (1, 2),
        (2, 1),
        (2, -1),
        (1, -2),
        (-1, -2),
        (-2, -1),
        (-2, 1),
        (-1, 2),
    ];

    const fn leaper(deltas: &[(i8, i8)]) -> [u64; 64] {
        let mut out = [0u64; 64];
        let mut s = 0;
        while s < 64 {
            let f = (s % 8) as i8;
            let r = (s / 8) as i8;
            let mut i = 0;
            while i < deltas.len() {
                let nf = f + deltas[i].0;
                let nr = r + deltas[i].1;
                if nf >= 0 && nf < 8 && nr >= 0 && nr < 8 {
                    out[s] |= 1u64 << (nr * 8 + nf);
                }
                i += 1;
            }
            s += 1;
        }
        out
    }

    pub static KNIGHT: [u64; 64] = leaper(&KNIGHT_JUMPS);
    pub static KING: [u64; 64] = leaper(&QUEEN_DIRS);
    /// Squares attacked by a pawn of the given color standing on each square.
    pub static PAWN_ATTACKS: [[u64; 64]; 2] = [leaper(&[(-1, 1), (1, 1)]), leaper(&[(-1, -1), (1, -1)])];
}
