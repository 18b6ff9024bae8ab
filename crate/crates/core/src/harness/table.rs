use std::fmt::Write as _;

use crate::harness::ErrorRecord;

/// One error column of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    PressureD,
    PressureN,
    FluxD,
    FluxS,
    FluxN,
    FluxT,
    FluxP,
}

impl Column {
    fn get(self, r: &ErrorRecord) -> Option<f64> {
        match self {
            Column::PressureD => Some(r.errd_p),
            Column::PressureN => Some(r.errn_p),
            Column::FluxD => Some(r.errd_q),
            Column::FluxS => r.errs_q,
            Column::FluxN => Some(r.errn_q),
            Column::FluxT => r.errt_q,
            Column::FluxP => r.errp_q,
        }
    }
}

/// Errors of one case over a sequence of meshes, coarse to fine.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    pub records: Vec<ErrorRecord>,
    /// Use the four-dimensional layout (transfer and perfusion columns).
    pub four_d: bool,
}

pub const HEADER_2D: &str = "variable,inv_h,errD,rateD,errS,rateS,errN,rateN";
pub const HEADER_4D: &str = "variable,inv_h,errD,rateD,errT,rateT,errN,rateN,errP,rateP";

impl ConvergenceTable {
    pub fn errors(&self, col: Column) -> Vec<Option<f64>> {
        self.records.iter().map(|r| col.get(r)).collect()
    }

    /// `rates[i]` compares mesh `i` with mesh `i − 1`; the first entry is `None`.
    pub fn rates(&self, col: Column) -> Vec<Option<f64>> {
        let mut out = vec![None; self.records.len()];
        for i in 1..self.records.len() {
            let (a, b) = (&self.records[i - 1], &self.records[i]);
            if let (Some(ea), Some(eb)) = (col.get(a), col.get(b)) {
                if ea > 0.0 && eb > 0.0 && ea.is_finite() && eb.is_finite() {
                    let ratio = b.inv_h as f64 / a.inv_h as f64;
                    out[i] = Some((ea / eb).ln() / ratio.ln());
                }
            }
        }
        out
    }

    /// Mean of the available rates.
    pub fn average_rate(&self, col: Column) -> Option<f64> {
        let r: Vec<f64> = self.rates(col).into_iter().flatten().collect();
        if r.is_empty() {
            None
        } else {
            Some(r.iter().sum::<f64>() / r.len() as f64)
        }
    }

    pub fn header(&self) -> &'static str {
        if self.four_d {
            HEADER_4D
        } else {
            HEADER_2D
        }
    }

    /// Pressure block, then flux block, each closed by an average row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.header()).unwrap();
        if self.records.is_empty() {
            return out;
        }
        let middle = if self.four_d { Column::FluxT } else { Column::FluxS };
        let blocks: [(&str, [Option<Column>; 4]); 2] = [
            ("p", [Some(Column::PressureD), None, Some(Column::PressureN), None]),
            ("q", [Some(Column::FluxD), Some(middle), Some(Column::FluxN), Some(Column::FluxP)]),
        ];
        let ncols = if self.four_d { 4 } else { 3 };
        for (name, cols) in blocks {
            let cols = &cols[..ncols];
            let rates: Vec<Option<Vec<Option<f64>>>> = cols.iter().map(|c| c.map(|c| self.rates(c))).collect();
            for (i, rec) in self.records.iter().enumerate() {
                let mut line = format!("{name},{}", rec.inv_h);
                for (c, r) in cols.iter().zip(&rates) {
                    let e = c.and_then(|c| c.get(rec));
                    let rate = r.as_ref().and_then(|r| r[i]);
                    line.push(',');
                    line.push_str(&fmt_err(e));
                    line.push(',');
                    line.push_str(&fmt_rate(rate));
                }
                writeln!(out, "{line}").unwrap();
            }
            let mut line = format!("{name},average");
            for c in cols {
                line.push(',');
                line.push(',');
                line.push_str(&fmt_rate(c.and_then(|c| self.average_rate(c))));
            }
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

fn fmt_err(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3e}")).unwrap_or_default()
}

fn fmt_rate(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.2}")).unwrap_or_default()
}
