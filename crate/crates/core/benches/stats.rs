use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdfcorpus_core::langid::{detect_language, LangIdConfig, ProfileSet};
use pdfcorpus_core::layout::{PageText, Rect, Token};
use pdfcorpus_core::par;
use pdfcorpus_core::stats::{CorpusStats, DocumentFacts, StatsConfig};

fn synthetic_docs(n: usize) -> Vec<DocumentFacts> {
    (0..n)
        .map(|d| {
            let pages = (0..8)
                .map(|p| {
                    let mut page = PageText::empty(p, 595.0, 842.0);
                    for i in 0..300 {
                        let col = (i / 50) % 2;
                        let x = 60.0 + col as f64 * 260.0 + ((i * 37 + d) % 200) as f64;
                        let y = 780.0 - (i % 50) as f64 * 14.0;
                        page.tokens.push(Token {
                            text: "word".into(),
                            page_index: p,
                            bbox: Rect::new(x, y, x + 30.0, y + 10.0),
                            visible: true,
                        });
                    }
                    page.line_count = 50;
                    page
                })
                .collect();
            DocumentFacts {
                creation_year: Some(2000 + (d % 23) as i32),
                pdf_version: Some("1.5".into()),
                creator: Some("Writer".into()),
                pages,
            }
        })
        .collect()
}

fn bench_stats(c: &mut Criterion) {
    let cfg = StatsConfig::default();
    let docs = synthetic_docs(200);
    let mut g = c.benchmark_group("corpus_stats");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("sequential", docs.len()), |b| {
        b.iter(|| CorpusStats::collect_sequential(&docs, &cfg))
    });
    g.bench_function(BenchmarkId::new("parallel", docs.len()), |b| {
        b.iter(|| CorpusStats::collect(&docs, &cfg))
    });
    g.finish();
}

fn bench_langid(c: &mut Criterion) {
    let cfg = LangIdConfig::default();
    let profiles = ProfileSet::train_bundled(&cfg).unwrap();
    let text = "Die Würde des Menschen ist unantastbar. Sie zu achten und zu schützen ist \
                Verpflichtung aller staatlichen Gewalt. "
        .repeat(20);
    let texts: Vec<String> = (0..64).map(|i| format!("{text} {i}")).collect();
    let mut g = c.benchmark_group("detect_language");
    g.sample_size(10);
    g.bench_function("sequential", |b| {
        b.iter(|| par::map_sequential(&texts, |t| detect_language(t, &profiles, &cfg)))
    });
    g.bench_function("parallel", |b| {
        b.iter(|| par::map(&texts, |t| detect_language(t, &profiles, &cfg)))
    });
    g.finish();
}

criterion_group!(benches, bench_stats, bench_langid);
criterion_main!(benches);
