use chrono::{Datelike, Days, NaiveDate, Weekday};
use proptest::prelude::*;
use rmtcorr::ingest::{self, MarketMeta, Observation, PricePanel, Region, Weekend};
use rmtcorr::Error;

/// Presence grid (market x day) plus an eastern flag per market.
fn calendar() -> impl Strategy<Value = (Vec<Vec<bool>>, Vec<bool>, f64)> {
    (2usize..7, 3usize..40).prop_flat_map(|(n, days)| {
        (
            prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.8), days), n),
            prop::collection::vec(any::<bool>(), n),
            prop::sample::select(vec![0.1, 0.2, 0.3, 0.5, 0.9]),
        )
    })
}

fn build(presence: &[Vec<bool>], eastern: &[bool]) -> PricePanel {
    let start = NaiveDate::from_ymd_opt(1998, 8, 3).unwrap();
    let markets = (0..presence.len())
        .map(|j| {
            let mut m = MarketMeta::plain(format!("M{j}"));
            if eastern[j] {
                m.region = Region::Oceania;
                m.eastern = true;
            }
            m
        })
        .collect();
    let series = presence
        .iter()
        .enumerate()
        .map(|(j, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &p)| p)
                .map(|(t, _)| Observation { date: start + Days::new(t as u64), close: 50.0 + (t * 3 + j) as f64 })
                .collect()
        })
        .collect();
    PricePanel::new(markets, series).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn alignment_invariants((presence, eastern, thr) in calendar()) {
        let panel = build(&presence, &eastern);
        let n = presence.len();
        let a = match ingest::align(&panel, thr) {
            Ok(a) => a,
            Err(Error::NoObservations { .. } | Error::EmptyCalendar) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        // 30%-style rule on the retained and dropped dates
        for d in &a.dates {
            let missing = panel.series.iter().filter(|s| !s.iter().any(|o| o.date == *d)).count();
            prop_assert!(missing as f64 / n as f64 <= thr);
        }
        for d in &a.dropped_dates {
            let missing = panel.series.iter().filter(|s| !s.iter().any(|o| o.date == *d)).count();
            prop_assert!(missing as f64 / n as f64 > thr);
        }
        // filled cells repeat a neighbouring observed value
        for j in 0..n {
            for t in 0..a.n_dates() {
                if a.fill_mask[(t, j)] {
                    let prev = (0..t).rev().find(|&s| !a.fill_mask[(s, j)]);
                    let next = (t + 1..a.n_dates()).find(|&s| !a.fill_mask[(s, j)]);
                    let src = prev.or(next).unwrap();
                    prop_assert_eq!(a.values[(t, j)], a.values[(src, j)]);
                    if prev.is_none() {
                        prop_assert!(next.is_some());
                    }
                } else {
                    let obs = panel.series[j].iter().find(|o| o.date == a.dates[t]).unwrap();
                    prop_assert_eq!(a.values[(t, j)], obs.close);
                }
            }
        }
        prop_assert_eq!(&ingest::realign(&a, thr).unwrap(), &a);
        if a.n_dates() >= 2 {
            let p = ingest::phase_east(&a).unwrap();
            prop_assert_eq!(p.n_dates(), a.n_dates() - 1);
            for (j, m) in a.markets.iter().enumerate() {
                let off = usize::from(m.eastern);
                for t in 0..p.n_dates() {
                    prop_assert_eq!(p.values[(t, j)], a.values[(t + off, j)]);
                }
            }
            prop_assert!(matches!(ingest::phase_east(&p), Err(Error::AlreadyPhased)));
        }
    }

    #[test]
    fn weekend_shift_lands_on_weekdays(days in prop::collection::btree_set(0u64..120, 1..40)) {
        let start = NaiveDate::from_ymd_opt(2001, 9, 2).unwrap();
        let mut m = MarketMeta::plain("TA");
        m.region = Region::Asia;
        m.weekend = Weekend::FriSat;
        let series: Vec<Observation> = days
            .iter()
            .map(|&k| start + Days::new(k))
            .filter(|d| !matches!(d.weekday(), Weekday::Fri | Weekday::Sat))
            .map(|date| Observation { date, close: 10.0 + date.ordinal() as f64 })
            .collect();
        let before = series.len();
        let panel = PricePanel::new(vec![m], vec![series]).unwrap();
        let (shifted, warnings) = ingest::shift_weekend(&panel);
        let out = &shifted.series[0];
        prop_assert!(out.iter().all(|o| !matches!(o.date.weekday(), Weekday::Sat | Weekday::Sun)));
        prop_assert!(out.windows(2).all(|w| w[0].date < w[1].date));
        prop_assert_eq!(out.len() + warnings.len(), before);
    }
}
