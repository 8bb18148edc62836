use pdfcorpus_core::layout::Rect;
use pdfcorpus_pdf::extract::count_lines;
use pdfcorpus_pdf::fixtures::{filler, single_column, two_column};
use pdfcorpus_pdf::writer::{PageSpec, PdfBuilder};
use pdfcorpus_pdf::{extract_tokens, parse_document};

fn pages(bytes: &[u8]) -> Vec<pdfcorpus_core::layout::PageText> {
    extract_tokens(&parse_document(bytes).unwrap())
}

// Helvetica AFM: H 722, e 556, l 222, o 556, space 278, W 944, r 333, d 556;
// Ascender 718, Descender -207.
#[test]
fn hello_world_geometry() {
    let mut b = PdfBuilder::new();
    let f = b.base14_font("Helvetica");
    let mut p = PageSpec::a4();
    p.content.text(f, 12.0, 72.0, 700.0, "Hello World");
    b.page(p);
    let page = &pages(&b.build())[0];
    let words: Vec<&str> = page.tokens.iter().map(|t| t.text.as_str()).collect();
    assert_eq!(words, ["Hello", "World"]);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-6;
    let hello = page.tokens[0].bbox;
    assert!(close(hello.x0, 72.0));
    assert!(close(hello.y0, 700.0 - 12.0 * 0.207));
    assert!(close(hello.y1, 700.0 + 12.0 * 0.718));
    assert!(close(hello.x1, 72.0 + 12.0 * 2.278));
    let world = page.tokens[1].bbox;
    assert!(close(world.x0, 72.0 + 12.0 * (2.278 + 0.278)));
    assert!(close(world.x1, world.x0 + 12.0 * 2.611));
    assert_eq!((world.y0, world.y1), (hello.y0, hello.y1));
    assert_eq!(page.line_count, 1);
}

#[test]
fn empty_page() {
    let mut b = PdfBuilder::new();
    b.page(PageSpec::a4());
    let p = &pages(&b.build())[0];
    assert!(p.tokens.is_empty());
    assert_eq!(p.line_count, 0);
    assert_eq!(count_lines(p), 0);
}

#[test]
fn single_column_round_trip() {
    let source: Vec<String> = (0..30).map(|i| filler(70, i)).collect();
    let refs: Vec<&str> = source.iter().map(String::as_str).collect();
    let page = &pages(&single_column(&refs).build())[0];
    assert_eq!(page.text(), source.join(" "));
    assert_eq!(page.line_count, 30);
    let words: usize = source.iter().map(|l| l.split_whitespace().count()).sum();
    assert_eq!(page.word_count(), words);
}

#[test]
fn two_columns_are_column_major() {
    let left: Vec<String> = (0..20).map(|i| format!("left{i} alpha beta")).collect();
    let right: Vec<String> = (0..20).map(|i| format!("right{i} gamma delta")).collect();
    let l: Vec<&str> = left.iter().map(String::as_str).collect();
    let r: Vec<&str> = right.iter().map(String::as_str).collect();
    let page = &pages(&two_column(&l, &r).build())[0];
    let text = page.text();
    assert_eq!(text, format!("{} {}", left.join(" "), right.join(" ")));
    let last_left = page.tokens.iter().rposition(|t| t.bbox.x0 < 300.0).unwrap();
    let first_right = page.tokens.iter().position(|t| t.bbox.x0 >= 300.0).unwrap();
    assert!(last_left < first_right);
    assert_eq!(page.line_count, 40);
}

#[test]
fn forty_baselines() {
    let lines: Vec<String> = (0..40).map(|i| format!("line {i} of the page")).collect();
    let mut b = PdfBuilder::new();
    let f = b.base14_font("Times-Roman");
    let mut p = PageSpec::a4();
    for (i, l) in lines.iter().enumerate() {
        p.content.text(f, 9.0, 60.0, 800.0 - 18.0 * i as f64, l);
    }
    b.page(p);
    let page = &pages(&b.build())[0];
    assert_eq!(page.line_count, 40);
    assert_eq!(count_lines(page), 40);
    assert_eq!(page.word_count(), 40 * 5);
}

#[test]
fn tokens_stay_on_page_for_every_rotation() {
    for rotation in [0u16, 90, 180, 270] {
        let mut b = PdfBuilder::new();
        let f = b.base14_font("Helvetica");
        let mut p = PageSpec::new(500.0, 700.0).rotated(rotation);
        p.media_box = [100.0, 50.0, 600.0, 750.0];
        for i in 0..10 {
            p.content.text(f, 10.0, 110.0, 740.0 - 60.0 * i as f64, "edge words here");
        }
        // off-page text is dropped
        p.content.text(f, 10.0, -500.0, 300.0, "gone");
        b.page(p);
        let page = &pages(&b.build())[0];
        let (w, h) = if rotation % 180 == 0 { (500.0, 700.0) } else { (700.0, 500.0) };
        assert_eq!((page.width, page.height), (w, h));
        assert_eq!(page.word_count(), 30);
        let media = Rect::new(-1.0, -1.0, w + 1.0, h + 1.0);
        for t in &page.tokens {
            assert!(t.bbox.x0 < t.bbox.x1 && t.bbox.y0 < t.bbox.y1);
            assert_eq!(t.bbox.intersect(&media), Some(t.bbox), "{rotation}: {t:?}");
        }
    }
}

#[test]
fn non_latin_text_through_to_unicode() {
    let mut b = PdfBuilder::new();
    let f = b.unicode_font();
    let mut p = PageSpec::a4();
    p.content.text(f, 12.0, 72.0, 700.0, "Съешь же ещё этих мягких булок");
    b.page(p);
    assert_eq!(pages(&b.build())[0].text(), "Съешь же ещё этих мягких булок");
}

#[test]
fn extraction_is_deterministic() {
    let left = ["a b c", "d e f"];
    let bytes = two_column(&left, &left).build();
    assert_eq!(pages(&bytes), pages(&bytes));
}
