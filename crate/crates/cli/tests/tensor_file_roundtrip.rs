//! Byte-level tests of the tensor file container: lossless round trips and
//! precise rejection of malformed files.

use onair_cli::error::CliError;
use onair_cli::tensor_file::{self, TensorData};
use onair_core::{CMatrix, ComplexTensor, Cx};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::path::PathBuf;

fn temp_path(name: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join(name);
    (dir, path)
}

fn io_message(err: CliError) -> String {
    match err {
        CliError::Io(msg) => msg,
        other => panic!("expected an i/o error, got {other}"),
    }
}

#[test]
fn identity_3x3_round_trips_bitwise() {
    let (_dir, path) = temp_path("eye.oatf");
    let eye = CMatrix::<f64>::identity(3);
    tensor_file::write_matrix(&path, &eye).expect("write identity");
    let file = tensor_file::read(&path).expect("read identity");
    assert_eq!(file.dims, vec![3, 3], "identity dims survive");
    let TensorData::Complex128(data) = file.data else {
        panic!("matrix files use the complex dtype");
    };
    for r in 0..3 {
        for c in 0..3 {
            let want: Cx<f64> = if r == c { Cx::new(1.0, 0.0) } else { Cx::new(0.0, 0.0) };
            let got = data[r * 3 + c];
            assert_eq!(got.re.to_bits(), want.re.to_bits(), "re bits at ({r},{c})");
            assert_eq!(got.im.to_bits(), want.im.to_bits(), "im bits at ({r},{c})");
        }
    }
}

#[test]
fn random_complex_stack_round_trips_bitwise() {
    let (_dir, path) = temp_path("stack.oatf");
    let mut rng = ChaCha12Rng::seed_from_u64(424242);
    let mut frames = ComplexTensor::<f64>::zeros(vec![10, 16, 16]);
    for z in frames.data_mut() {
        // Raw uniform doubles exercise the full mantissa.
        *z = Cx::new(rng.gen::<f64>() * 2e3 - 1e3, rng.gen::<f64>() * 2e-3 - 1e-3);
    }
    tensor_file::write_frames(&path, &frames).expect("write stack");
    let back = tensor_file::read_frames(&path).expect("read stack");
    assert_eq!(back.dims(), frames.dims(), "dims survive");

    // Order-sensitive checksum over the raw bit patterns, evaluated on both
    // sides of the round trip.
    let checksum = |t: &ComplexTensor<f64>| -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for z in t.data() {
            for bits in [z.re.to_bits(), z.im.to_bits()] {
                h ^= bits;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h
    };
    assert_eq!(checksum(&back), checksum(&frames), "bit checksum survives the round trip");
    for (a, b) in back.data().iter().zip(frames.data()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits(), "re bits survive");
        assert_eq!(a.im.to_bits(), b.im.to_bits(), "im bits survive");
    }
}

#[test]
fn real_tensor_round_trips_and_promotes_to_complex_frames() {
    let (_dir, path) = temp_path("real.oatf");
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let data: Vec<f64> = (0..4 * 3 * 2).map(|_| rng.gen::<f64>() * 10.0 - 5.0).collect();
    tensor_file::write_real(&path, &[4, 3, 2], &data).expect("write real");

    let file = tensor_file::read(&path).expect("read real");
    let TensorData::Real64(back) = file.data else {
        panic!("real files keep the real dtype");
    };
    for (a, b) in back.iter().zip(&data) {
        assert_eq!(a.to_bits(), b.to_bits(), "real payload survives bitwise");
    }

    let frames = tensor_file::read_frames(&path).expect("promote to frames");
    assert_eq!(frames.dims(), &[4, 3, 2], "promoted dims");
    for (z, v) in frames.data().iter().zip(&data) {
        assert_eq!(z.re.to_bits(), v.to_bits(), "promoted re part");
        assert_eq!(z.im, 0.0, "promoted imaginary part is zero");
    }
}

#[test]
fn all_ranks_up_to_four_round_trip() {
    for dims in [vec![5usize], vec![2, 3], vec![2, 2, 2], vec![2, 3, 2, 2]] {
        let (_dir, path) = temp_path("ranked.oatf");
        let count: usize = dims.iter().product();
        let data: Vec<Cx<f64>> =
            (0..count).map(|i| Cx::new(i as f64 + 0.5, -(i as f64) * 0.25)).collect();
        tensor_file::write_complex(&path, &dims, &data).expect("write");
        let file = tensor_file::read(&path).expect("read");
        assert_eq!(file.dims, dims, "dims for rank {}", dims.len());
        assert_eq!(file.data, TensorData::Complex128(data), "payload for rank {}", dims.len());
    }
}

#[test]
fn truncated_payload_is_rejected_naming_expected_and_actual_lengths() {
    let (_dir, path) = temp_path("trunc.oatf");
    let data: Vec<Cx<f64>> = (0..6).map(|i| Cx::new(i as f64, 0.0)).collect();
    tensor_file::write_complex(&path, &[2, 3], &data).expect("write");
    let full = std::fs::read(&path).expect("raw bytes");
    std::fs::write(&path, &full[..full.len() - 7]).expect("truncate");

    let msg = io_message(tensor_file::read(&path).expect_err("truncated payload"));
    // Header: 4 magic + 4 version + 4 dtype + 4 rank + 2 dims × 8 = 32 bytes;
    // payload: 6 complex entries × 16 = 96 bytes.
    assert!(msg.contains("128"), "expected total length named, got: {msg}");
    assert!(msg.contains("121"), "actual file length named, got: {msg}");
}

#[test]
fn truncated_header_is_rejected_with_the_byte_offset() {
    let (_dir, path) = temp_path("header.oatf");
    let data = [Cx::new(1.0, 2.0)];
    tensor_file::write_complex(&path, &[1], &data).expect("write");
    let full = std::fs::read(&path).expect("raw bytes");
    std::fs::write(&path, &full[..10]).expect("cut inside the dtype field");

    let msg = io_message(tensor_file::read(&path).expect_err("truncated header"));
    assert!(msg.contains("truncated file"), "truncation reported: {msg}");
    assert!(msg.contains("byte 8"), "offset of the dtype field named: {msg}");
}

#[test]
fn bad_magic_version_and_dtype_are_rejected_with_offsets() {
    let (_dir, path) = temp_path("bad.oatf");
    let data = [Cx::new(1.0, 2.0)];

    tensor_file::write_complex(&path, &[1], &data).expect("write");
    let good = std::fs::read(&path).expect("raw bytes");

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    std::fs::write(&path, &bad_magic).expect("corrupt magic");
    let msg = io_message(tensor_file::read(&path).expect_err("bad magic"));
    assert!(msg.contains("magic") && msg.contains("byte 0"), "magic offset named: {msg}");

    let mut bad_version = good.clone();
    bad_version[4] = 9;
    std::fs::write(&path, &bad_version).expect("corrupt version");
    let msg = io_message(tensor_file::read(&path).expect_err("bad version"));
    assert!(msg.contains("version 9") && msg.contains("byte 4"), "version offset named: {msg}");

    let mut bad_dtype = good;
    bad_dtype[8] = 7;
    std::fs::write(&path, &bad_dtype).expect("corrupt dtype");
    let msg = io_message(tensor_file::read(&path).expect_err("bad dtype"));
    assert!(msg.contains("dtype code 7") && msg.contains("byte 8"), "dtype offset named: {msg}");
}

#[test]
fn zero_dimensions_and_excessive_rank_are_rejected() {
    let (_dir, path) = temp_path("dims.oatf");
    let err = tensor_file::write_real(&path, &[2, 0], &[]).expect_err("zero dim");
    assert!(io_message(err).contains("do not describe"), "zero dims rejected on write");

    let err =
        tensor_file::write_real(&path, &[1, 1, 1, 1, 1], &[1.0]).expect_err("rank five");
    assert!(io_message(err).contains("rank"), "rank five rejected on write");

    // Hand-built rank-0 file.
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"OATF");
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&0u32.to_le_bytes());
    bytes.extend_from_slice(&0u32.to_le_bytes());
    std::fs::write(&path, &bytes).expect("write rank-0 file");
    let msg = io_message(tensor_file::read(&path).expect_err("rank zero"));
    assert!(msg.contains("rank"), "rank zero rejected on read: {msg}");
}

#[test]
fn frame_reader_requires_rank_three() {
    let (_dir, path) = temp_path("flat.oatf");
    tensor_file::write_real(&path, &[4, 2], &vec![1.0; 8]).expect("write matrix-shaped file");
    let msg = io_message(tensor_file::read_frames(&path).expect_err("rank two frames"));
    assert!(msg.contains("3-d"), "frame stacks must be rank 3: {msg}");
}
