use super::position::attacks;
use super::position::Position;
use super::types::{flags, CastlingRights, Color, Move, Piece, PieceKind, Square};

/// All legal moves, sorted by (from, to, promotion).
pub fn generate_legal_moves(pos: &Position) -> Vec<Move> {
    let mut moves = Vec::with_capacity(48);
    generate_pseudo_legal(pos, &mut moves);
    let us = pos.side_to_move();
    moves.retain(|&m| {
        let next = pos.apply(m);
        !next.is_attacked(next.king_square(us), us.opposite())
    });
    moves.sort_unstable_by_key(|m| m.sort_key());
    moves
}

/// Leaf count of the legal move tree.
pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = generate_legal_moves(pos);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|&m| perft(&pos.apply(m), depth - 1))
        .sum()
}

fn generate_pseudo_legal(pos: &Position, out: &mut Vec<Move>) {
    let us = pos.side_to_move();
    let board = pos.board();
    for (i, cell) in board.iter().enumerate() {
        let Some(piece) = *cell else { continue };
        if piece.color != us {
            continue;
        }
        let from = Square::new(i as u8);
        match piece.kind {
            PieceKind::Pawn => pawn_moves(pos, from, us, out),
            PieceKind::Knight => leaper_moves(pos, from, attacks::KNIGHT[i], us, out),
            PieceKind::Bishop => slider_moves(pos, from, &attacks::BISHOP_DIRS, us, out),
            PieceKind::Rook => slider_moves(pos, from, &attacks::ROOK_DIRS, us, out),
            PieceKind::Queen => slider_moves(pos, from, &attacks::QUEEN_DIRS, us, out),
            PieceKind::King => {
                leaper_moves(pos, from, attacks::KING[i], us, out);
                castling_moves(pos, from, us, out);
            }
        }
    }
}

fn leaper_moves(pos: &Position, from: Square, mut targets: u64, us: Color, out: &mut Vec<Move>) {
    while targets != 0 {
        let to = Square::new(targets.trailing_zeros() as u8);
        targets &= targets - 1;
        match pos.piece_at(to) {
            None => out.push(Move::new(from, to, None, 0)),
            Some(p) if p.color != us => out.push(Move::new(from, to, None, flags::CAPTURE)),
            Some(_) => {}
        }
    }
}

fn slider_moves(pos: &Position, from: Square, dirs: &[(i8, i8)], us: Color, out: &mut Vec<Move>) {
    for &(df, dr) in dirs {
        let mut cur = from;
        while let Some(to) = cur.offset(df, dr) {
            match pos.piece_at(to) {
                None => out.push(Move::new(from, to, None, 0)),
                Some(p) => {
                    if p.color != us {
                        out.push(Move::new(from, to, None, flags::CAPTURE));
                    }
                    break;
                }
            }
            cur = to;
        }
    }
}

fn push_pawn_move(from: Square, to: Square, flag: u8, out: &mut Vec<Move>) {
    if to.rank() == 0 || to.rank() == 7 {
        for kind in PieceKind::PROMOTIONS {
            out.push(Move::new(from, to, Some(kind), flag));
        }
    } else {
        out.push(Move::new(from, to, None, flag));
    }
}

fn pawn_moves(pos: &Position, from: Square, us: Color, out: &mut Vec<Move>) {
    let (dir, start_rank) = match us {
        Color::White => (1i8, 1u8),
        Color::Black => (-1i8, 6u8),
    };
    if let Some(one) = from.offset(0, dir) {
        if pos.piece_at(one).is_none() {
            push_pawn_move(from, one, 0, out);
            if from.rank() == start_rank {
                let two = one.offset(0, dir).expect("double push stays on board");
                if pos.piece_at(two).is_none() {
                    out.push(Move::new(from, two, None, flags::DOUBLE_PUSH));
                }
            }
        }
    }
    for df in [-1i8, 1] {
        let Some(to) = from.offset(df, dir) else { continue };
        match pos.piece_at(to) {
            Some(p) if p.color != us => push_pawn_move(from, to, flags::CAPTURE, out),
            None if pos.en_passant() == Some(to) => out.push(Move::new(
                from,
                to,
                None,
                flags::CAPTURE | flags::EN_PASSANT,
            )),
            _ => {}
        }
    }
}

fn castling_moves(pos: &Position, from: Square, us: Color, out: &mut Vec<Move>) {
    let rights = pos.castling_rights();
    let rank = match us {
        Color::White => 0,
        Color::Black => 7,
    };
    if from != Square::from_coords(4, rank) {
        return;
    }
    let them = us.opposite();
    let empty = |file: u8| pos.piece_at(Square::from_coords(file, rank)).is_none();
    let safe = |file: u8| !pos.is_attacked(Square::from_coords(file, rank), them);
    let rook = Some(Piece::new(us, PieceKind::Rook));

    if rights.has(CastlingRights::kingside(us))
        && pos.piece_at(Square::from_coords(7, rank)) == rook
        && empty(5)
        && empty(6)
        && safe(4)
        && safe(5)
        && safe(6)
    {
        out.push(Move::new(from, Square::from_coords(6, rank), None, flags::CASTLE));
    }
    if rights.has(CastlingRights::queenside(us))
        && pos.piece_at(Square::from_coords(0, rank)) == rook
        && empty(1)
        && empty(2)
        && empty(3)
        && safe(4)
        && safe(3)
        && safe(2)
    {
        out.push(Move::new(from, Square::from_coords(2, rank), None, flags::CASTLE));
    }
}
