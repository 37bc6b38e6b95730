use corpuskit_core::model::{parse_post, read_corpus, serialize_post, write_corpus};
use corpuskit_core::{CommentNode, PostRecord};
use corpuskit_testkit::{chain_record, random_record, RecordShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn depths_recursive(nodes: &[CommentNode], depth: usize, out: &mut Vec<(String, usize)>) {
    for n in nodes {
        out.push((n.id.clone(), depth));
        depths_recursive(&n.replies, depth + 1, out);
    }
}

#[test]
fn random_records_round_trip_field_for_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let shape = RecordShape::default();
    for n in 0..2000 {
        let r = random_record(&mut rng, n, &shape);
        let line = serialize_post(&r);
        assert!(!line.contains('\n'));
        let back = parse_post(&line).unwrap();
        assert_eq!(back, r);
        assert_eq!(serialize_post(&back), line);
    }
}

#[test]
fn flatten_matches_recursive_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let shape = RecordShape { max_comments: 100, ..RecordShape::default() };
    for n in 0..300 {
        let r = random_record(&mut rng, n, &shape);
        let mut expected = Vec::new();
        depths_recursive(&r.comments, 0, &mut expected);
        let got: Vec<(String, usize)> =
            r.flatten_comments().into_iter().map(|(c, d)| (c.id.clone(), d)).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn depth_31_chain_survives_files_and_gzip() {
    let posts: Vec<PostRecord> = (0..3).map(|i| chain_record(&format!("deep{i}"), 31)).collect();
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("c.jsonl");
    write_corpus(&plain, &posts).unwrap();
    assert_eq!(read_corpus(&plain).unwrap().posts, posts);

    let gz = dir.path().join("c.jsonl.gz");
    let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::fast());
    std::io::Write::write_all(&mut enc, &std::fs::read(&plain).unwrap()).unwrap();
    std::fs::write(&gz, enc.finish().unwrap()).unwrap();
    let back = read_corpus(&gz).unwrap();
    assert_eq!(back.posts, posts);
    assert_eq!(back.posts[0].flatten_comments().last().unwrap().1, 31);
}
