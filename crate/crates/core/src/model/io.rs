//! CSV ingestion and emission for the three dataset files.
//!
//! `segments.csv` is long format, one row per 10 Hz frame; a segment is a
//! contiguous run of rows for one player ending at the row whose shot_frame
//! flag is set. `playtypes.csv` holds one row per player-season with empty
//! cells marking missing playtype percentages. `lineups.csv` is one row per
//! lineup observation.

use std::io::{Read, Write};
use std::path::Path;

use super::types::{LineupRecord, PlaytypeProfile, ShotSegment, RAW_PLAYTYPES, RIM_XY};
use crate::{Error, Result};

const SEGMENT_HEADER: [&str; 7] = [
    "player_id",
    "t",
    "x",
    "y",
    "ball_held",
    "shot_frame",
    "is_three",
];

pub fn write_segments_csv<W: Write>(writer: W, segments: &[ShotSegment]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SEGMENT_HEADER)?;
    for seg in segments {
        let n = seg.timestamps.len();
        for (j, (&t, xy)) in seg.timestamps.iter().zip(&seg.shooter_xy).enumerate() {
            let held = t >= seg.ball_received_time - 1e-9;
            let is_shot = j + 1 == n;
            w.write_record([
                seg.player_id.as_str(),
                &format_f64(t),
                &format_f64(xy[0]),
                &format_f64(xy[1]),
                if held { "1" } else { "0" },
                if is_shot { "1" } else { "0" },
                if seg.is_three { "1" } else { "0" },
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_segments_csv<R: Read>(reader: R) -> Result<Vec<ShotSegment>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut segments = Vec::new();
    let mut current: Option<PartialSegment> = None;

    for (line, record) in r.records().enumerate() {
        let record = record?;
        let locator = format!("segments.csv line {}", line + 2);
        if record.len() != 7 {
            return Err(Error::Parse {
                locator,
                message: format!("expected 7 columns, found {}", record.len()),
            });
        }
        let player_id = record[0].to_string();
        let t = parse_f64(&record[1], &locator, "t")?;
        let x = parse_f64(&record[2], &locator, "x")?;
        let y = parse_f64(&record[3], &locator, "y")?;
        let held = parse_flag(&record[4], &locator, "ball_held")?;
        let shot = parse_flag(&record[5], &locator, "shot_frame")?;
        let three = parse_flag(&record[6], &locator, "is_three")?;

        match current.as_mut() {
            Some(p) if p.player_id == player_id => p.push(t, [x, y], held, three),
            Some(_) => {
                return Err(Error::Parse {
                    locator,
                    message: "segment for previous player has no shot_frame row".to_string(),
                });
            }
            None => {
                let mut p = PartialSegment::new(player_id);
                p.push(t, [x, y], held, three);
                current = Some(p);
            }
        }
        if shot {
            let p = current.take().expect("segment in progress");
            segments.push(p.finish());
        }
    }
    if current.is_some() {
        return Err(Error::Parse {
            locator: "segments.csv end of file".to_string(),
            message: "trailing rows without a shot_frame row".to_string(),
        });
    }
    Ok(segments)
}

struct PartialSegment {
    player_id: String,
    timestamps: Vec<f64>,
    shooter_xy: Vec<[f64; 2]>,
    held: Vec<bool>,
    is_three: bool,
}

impl PartialSegment {
    fn new(player_id: String) -> Self {
        Self {
            player_id,
            timestamps: Vec::new(),
            shooter_xy: Vec::new(),
            held: Vec::new(),
            is_three: false,
        }
    }

    fn push(&mut self, t: f64, xy: [f64; 2], held: bool, three: bool) {
        self.timestamps.push(t);
        self.shooter_xy.push(xy);
        self.held.push(held);
        self.is_three = three;
    }

    /// Reception time is the start of the last contiguous ball_held run
    /// ending at the shot frame; a shooter not holding at release gets a
    /// zero hold time.
    fn finish(self) -> ShotSegment {
        let n = self.timestamps.len();
        let mut recv_idx = n - 1;
        if self.held[n - 1] {
            while recv_idx > 0 && self.held[recv_idx - 1] {
                recv_idx -= 1;
            }
        }
        ShotSegment {
            ball_received_time: self.timestamps[recv_idx],
            player_id: self.player_id,
            timestamps: self.timestamps,
            shooter_xy: self.shooter_xy,
            rim_xy: RIM_XY,
            made_shot: false,
            is_three: self.is_three,
        }
    }
}

pub fn write_playtypes_csv<W: Write>(writer: W, profiles: &[PlaytypeProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["player_id", "season"];
    header.extend(RAW_PLAYTYPES);
    header.extend(["ast_pct", "usg_pct", "games_played", "minutes_per_game"]);
    w.write_record(&header)?;
    for p in profiles {
        let mut row = vec![p.player_id.clone(), p.season.clone()];
        for pct in &p.playtype_pct {
            row.push(pct.map(format_f64).unwrap_or_default());
        }
        row.push(format_f64(p.ast_pct));
        row.push(format_f64(p.usg_pct));
        row.push(p.games_played.to_string());
        row.push(format_f64(p.minutes_per_game));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_playtypes_csv<R: Read>(reader: R) -> Result<Vec<PlaytypeProfile>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut profiles = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let locator = format!("playtypes.csv line {}", line + 2);
        let expected = 2 + RAW_PLAYTYPES.len() + 4;
        if record.len() != expected {
            return Err(Error::Parse {
                locator,
                message: format!("expected {expected} columns, found {}", record.len()),
            });
        }
        let mut playtype_pct = [None; 11];
        for (j, cell) in record.iter().skip(2).take(11).enumerate() {
            if !cell.is_empty() {
                playtype_pct[j] = Some(parse_f64(cell, &locator, RAW_PLAYTYPES[j])?);
            }
        }
        profiles.push(PlaytypeProfile {
            player_id: record[0].to_string(),
            season: record[1].to_string(),
            playtype_pct,
            ast_pct: parse_f64(&record[13], &locator, "ast_pct")?,
            usg_pct: parse_f64(&record[14], &locator, "usg_pct")?,
            games_played: record[15].parse().map_err(|_| Error::Parse {
                locator: locator.clone(),
                message: format!("bad games_played '{}'", &record[15]),
            })?,
            minutes_per_game: parse_f64(&record[16], &locator, "minutes_per_game")?,
        });
    }
    Ok(profiles)
}

pub fn write_lineups_csv<W: Write>(writer: W, lineups: &[LineupRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "team",
        "season",
        "p1",
        "p2",
        "p3",
        "p4",
        "p5",
        "minutes",
        "offrtg",
        "team_offrtg",
    ])?;
    for l in lineups {
        let mut row = vec![l.team.clone(), l.season.clone()];
        for i in 0..5 {
            row.push(l.player_ids.get(i).cloned().unwrap_or_default());
        }
        row.push(format_f64(l.minutes));
        row.push(format_f64(l.offrtg));
        row.push(format_f64(l.team_offrtg));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_lineups_csv<R: Read>(reader: R) -> Result<Vec<LineupRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut lineups = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let locator = format!("lineups.csv line {}", line + 2);
        if record.len() != 10 {
            return Err(Error::Parse {
                locator,
                message: format!("expected 10 columns, found {}", record.len()),
            });
        }
        lineups.push(LineupRecord {
            team: record[0].to_string(),
            season: record[1].to_string(),
            player_ids: (2..7)
                .map(|i| record[i].to_string())
                .filter(|s| !s.is_empty())
                .collect(),
            minutes: parse_f64(&record[7], &locator, "minutes")?,
            offrtg: parse_f64(&record[8], &locator, "offrtg")?,
            team_offrtg: parse_f64(&record[9], &locator, "team_offrtg")?,
        });
    }
    Ok(lineups)
}

pub fn format_f64(v: f64) -> String {
    // Shortest representation that round-trips exactly.
    format!("{v}")
}

fn parse_f64(cell: &str, locator: &str, field: &str) -> Result<f64> {
    cell.parse().map_err(|_| Error::Parse {
        locator: locator.to_string(),
        message: format!("bad {field} value '{cell}'"),
    })
}

fn parse_flag(cell: &str, locator: &str, field: &str) -> Result<bool> {
    match cell {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Parse {
            locator: locator.to_string(),
            message: format!("bad {field} flag '{cell}', expected 0 or 1"),
        }),
    }
}

/// Read a whole file, mapping io errors to a locator-carrying parse error.
pub fn open_for_read(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Parse {
        locator: path.display().to_string(),
        message: e.to_string(),
    })
}
