//! Scheduled event list: `idxToken,tStart,idxResource,idxProcess`, one event per row.

/// Required header columns. Any order is accepted.
pub const EVENT_COLUMNS: [&str; 4] = ["idxToken", "tStart", "idxResource", "idxProcess"];

#[derive(Debug, Clone, PartialEq)]
pub struct RawEvent {
    /// 1-based data row in the source file (header excluded).
    pub row: usize,
    pub token: u64,
    pub t_start: f64,
    /// 1-based global resource index.
    pub resource: usize,
    /// 1-based process index.
    pub process: usize,
}

/// Events sorted by start time; ties keep file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawEventList {
    pub rows: Vec<RawEvent>,
}

impl RawEventList {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EventListError {
    #[error("event list header: {0}")]
    Header(String),
    #[error("event list row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("event list row {row}, column {column}: {value:?} is not a valid {expected}")]
    Cell { row: usize, column: &'static str, value: String, expected: &'static str },
    #[error("event list row {row}: {message}")]
    Domain { row: usize, message: String },
}

pub fn parse_event_list(csv_bytes: &[u8]) -> Result<RawEventList, EventListError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_bytes);
    let headers = rdr.headers().map_err(|e| EventListError::Header(e.to_string()))?.clone();
    let mut pos = [usize::MAX; 4];
    for (i, h) in headers.iter().enumerate() {
        let Some(k) = EVENT_COLUMNS.iter().position(|c| *c == h) else {
            return Err(EventListError::Header(format!("unexpected column {h:?}")));
        };
        if pos[k] != usize::MAX {
            return Err(EventListError::Header(format!("duplicate column {h:?}")));
        }
        pos[k] = i;
    }
    if let Some(k) = pos.iter().position(|&p| p == usize::MAX) {
        return Err(EventListError::Header(format!("missing column {:?}", EVENT_COLUMNS[k])));
    }

    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let row = n + 1;
        let rec = rec.map_err(|e| EventListError::Row { row, message: e.to_string() })?;
        let cell = |k: usize| rec.get(pos[k]).unwrap_or("");
        let index = |k: usize| -> Result<u64, EventListError> {
            let v = cell(k);
            let parsed = v.parse::<u64>().map_err(|_| EventListError::Cell {
                row,
                column: EVENT_COLUMNS[k],
                value: v.to_string(),
                expected: "positive integer",
            })?;
            if parsed == 0 {
                return Err(EventListError::Domain { row, message: format!("{} must be >= 1", EVENT_COLUMNS[k]) });
            }
            Ok(parsed)
        };
        let token = index(0)?;
        let t_raw = cell(1);
        let t_start = t_raw
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite())
            .ok_or_else(|| EventListError::Cell { row, column: "tStart", value: t_raw.to_string(), expected: "number" })?;
        if t_start < 0.0 {
            return Err(EventListError::Domain { row, message: format!("negative tStart {t_start}") });
        }
        let to_usize = |v: u64, k: usize| {
            usize::try_from(v).map_err(|_| EventListError::Domain { row, message: format!("{} out of range", EVENT_COLUMNS[k]) })
        };
        let resource = to_usize(index(2)?, 2)?;
        let process = to_usize(index(3)?, 3)?;
        rows.push(RawEvent { row, token, t_start, resource, process });
    }
    // `sort_by` is stable, so equal start times keep file order.
    rows.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
    Ok(RawEventList { rows })
}
