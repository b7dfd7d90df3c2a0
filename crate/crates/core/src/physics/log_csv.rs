use std::io::{Read, Write};

use super::LossBreakdown;

pub const LOSS_CSV_HEADER: [&str; 9] = [
    "epoch",
    "momentum_x",
    "momentum_y",
    "momentum_z",
    "continuity",
    "bc_wall",
    "bc_inlet",
    "bc_outlet",
    "total",
];

/// One row per epoch, numbering from `first_epoch`.
pub fn write_loss_csv<W: Write>(history: &[LossBreakdown], first_epoch: usize, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LOSS_CSV_HEADER)?;
    for (i, loss) in history.iter().enumerate() {
        let mut row = vec![(first_epoch + i).to_string()];
        row.extend(loss.terms().iter().map(|t| format!("{t:?}")));
        row.push(format!("{:?}", loss.total));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a loss log back into `(epoch, breakdown)` rows. Non-finite values
/// (`NaN`, `inf`) are preserved.
pub fn read_loss_csv<R: Read>(reader: R) -> Result<Vec<(usize, LossBreakdown)>, String> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != LOSS_CSV_HEADER {
        return Err(format!("unexpected loss log header {:?}", headers));
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let line = i + 2;
        let epoch: usize = record[0].parse().map_err(|_| format!("line {line}: bad epoch {:?}", &record[0]))?;
        let mut vals = [0.0; 8];
        for (k, v) in vals.iter_mut().enumerate() {
            *v = record[k + 1]
                .parse()
                .map_err(|_| format!("line {line}: bad value {:?}", &record[k + 1]))?;
        }
        let mut loss = LossBreakdown::from_terms(vals[..7].try_into().expect("seven terms"));
        loss.total = vals[7];
        rows.push((epoch, loss));
    }
    Ok(rows)
}
