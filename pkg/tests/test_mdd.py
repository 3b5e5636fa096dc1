import pytest
from hypothesis import given, strategies as st

from appds.mdd import (
    DuplicateFieldName,
    FieldSpec,
    InvalidExpectWidth,
    MddSchema,
    MddSyntaxError,
    MissingTimestampKey,
    MultipleTimestampKeys,
    ScalarType,
    UnknownRepeatRef,
    UnsupportedEndianness,
    header_size,
    parse_mdd,
    record_size,
    to_text,
)

MINIMAL = """\
format tiny
endian little
header:
  n: u32
events repeat header.n:
  timestamp_ns: u64 meta key=timestamp
"""


def test_minimal_schema():
    schema = parse_mdd(MINIMAL)
    assert schema.format_name == "tiny"
    assert header_size(schema) == 4
    assert record_size(schema) == 8
    assert schema.repeat_ref == "n"
    assert schema.timestamp_field == "timestamp_ns"


def test_dat1_reference_schema(dat1_schema):
    assert header_size(dat1_schema) == 32  # 4+2+2+4+4+16
    assert record_size(dat1_schema) == 40  # 8+8+4+4+4+1+11
    meta = dat1_schema.meta_header_fields + dat1_schema.meta_event_fields
    assert [f.name for f in meta] == [
        "source_id", "run_id",
        "timestamp_ns", "energy_tev", "zenith_deg", "n_hits", "quality",
    ]
    magic = dat1_schema.header_fields[0]
    assert magic.expect == b"DAT1"


def test_dst1_reference_schema(dst1_schema):
    assert header_size(dst1_schema) == 32
    assert record_size(dst1_schema) == 48  # 8+8+4+4+4+4+4+1+11


def test_unknown_repeat_ref():
    text = MINIMAL.replace("header.n:", "header.count:")
    with pytest.raises(UnknownRepeatRef):
        parse_mdd(text)


def test_repeat_ref_must_be_unsigned_wide():
    text = MINIMAL.replace("n: u32", "n: u8")
    with pytest.raises(MddSyntaxError, match="repeat field"):
        parse_mdd(text)


def test_duplicate_field_name():
    text = MINIMAL.replace(
        "  n: u32", "  n: u32\n  n: u16"
    )
    with pytest.raises(DuplicateFieldName):
        parse_mdd(text)


def test_missing_timestamp_key():
    text = MINIMAL.replace(" meta key=timestamp", " meta")
    with pytest.raises(MissingTimestampKey):
        parse_mdd(text)


def test_multiple_timestamp_keys():
    text = MINIMAL + "  t2: u64 meta key=timestamp\n"
    with pytest.raises(MultipleTimestampKeys):
        parse_mdd(text)


def test_invalid_expect_width():
    text = MINIMAL.replace("n: u32", 'n: u32 expect "too long"')
    with pytest.raises(InvalidExpectWidth):
        parse_mdd(text)


def test_expect_width_ok_counts_bytes():
    text = MINIMAL.replace("n: u32", 'n: u32 expect "ABCD"')
    schema = parse_mdd(text)
    assert schema.header_fields[0].expect == b"ABCD"


def test_unsupported_endianness():
    with pytest.raises(UnsupportedEndianness):
        parse_mdd(MINIMAL.replace("endian little", "endian big"))


@pytest.mark.parametrize("mutation,match", [
    (("  n: u32", "   n: u32"), "indentation"),
    (("  n: u32", "  n: u33"), "unknown type"),
    (("  n: u32", "  n: bytes[0]"), "unknown type"),
    (("format tiny", "fmt tiny"), "expected 'format"),
    (("  timestamp_ns: u64 meta key=timestamp",
      "  timestamp_ns: u64 meta key=timestamp junk"), "unexpected token"),
    (("  timestamp_ns: u64 meta key=timestamp",
      '  timestamp_ns: u64 meta key=timestamp expect "12345678"'), "only valid on header"),
    (("  n: u32", "  n: u32 key=timestamp"), "only valid on event"),
    (("  n: u32", "  n: bytes[4] meta"), "must be numeric"),
    (("  timestamp_ns: u64 meta key=timestamp",
      "  timestamp_ns: u32 meta key=timestamp"), "requires type u64"),
    (("  timestamp_ns: u64 meta key=timestamp",
      "  timestamp_ns: u64 key=timestamp"), "requires 'meta'"),
])
def test_syntax_errors(mutation, match):
    old, new = mutation
    with pytest.raises(MddSyntaxError, match=match):
        parse_mdd(MINIMAL.replace(old, new))


def test_error_carries_line_number():
    with pytest.raises(MddSyntaxError) as exc:
        parse_mdd(MINIMAL.replace("  n: u32", "  n u32"))
    assert exc.value.line == 4


def test_comments_and_blank_lines_ignored():
    noisy = "# leading comment\n\n" + MINIMAL.replace(
        "  n: u32", "  n: u32  # trailing comment\n"
    ) + "\n# tail\n"
    assert parse_mdd(noisy) == parse_mdd(MINIMAL)


def test_hash_inside_expect_literal():
    text = MINIMAL.replace("n: u32", 'n: u32 expect "ab#c"')
    schema = parse_mdd(text)
    assert schema.header_fields[0].expect == b"ab#c"


def test_sizes_invariant_under_comment_reordering(dat1_schema):
    text = to_text(dat1_schema)
    lines = text.splitlines()
    noisy = []
    for line in lines:
        noisy.append("# noise")
        noisy.append(line)
        noisy.append("")
    again = parse_mdd("\n".join(noisy))
    assert header_size(again) == header_size(dat1_schema)
    assert record_size(again) == record_size(dat1_schema)


def test_round_trip_reference_schemas(dat1_schema, dst1_schema):
    for schema in (dat1_schema, dst1_schema):
        assert parse_mdd(to_text(schema)) == schema


def test_unspellable_expect_is_refused_by_serializer():
    schema = MddSchema(
        format_name="q",
        endianness="little",
        header_fields=(
            FieldSpec("m", ScalarType.bytes_(2), expect=b'a"'),
            FieldSpec("n", ScalarType.numeric("u32")),
        ),
        event_fields=(FieldSpec("t", ScalarType.numeric("u64"), is_meta=True,
                                is_timestamp_key=True),),
        repeat_ref="n",
    )
    schema.validate()  # the schema itself is fine, only its spelling is not
    with pytest.raises(ValueError, match="no MDD spelling"):
        to_text(schema)


# -- property tests over generated schemas -----------------------------------

_NUMERIC = ["u8", "u16", "u32", "u64", "i8", "i16", "i32", "i64", "f32", "f64"]
_ident = st.from_regex(r"[a-z_][a-z0-9_]{0,8}", fullmatch=True)


@st.composite
def schemas(draw):
    def scalar():
        kind = draw(st.sampled_from(_NUMERIC + ["bytes"]))
        if kind == "bytes":
            return ScalarType.bytes_(draw(st.integers(1, 16)))
        return ScalarType.numeric(kind)

    names = draw(st.lists(_ident, min_size=3, max_size=10, unique=True))
    n_header = draw(st.integers(1, len(names) - 2))
    header_names = names[:n_header]
    event_names = names[n_header:]

    header_fields = []
    for i, name in enumerate(header_names):
        t = scalar()
        expect = None
        if t.is_bytes and draw(st.booleans()):
            # printable ASCII except '"', which the grammar cannot spell
            expect = bytes(
                draw(st.integers(0x20, 0x7E).filter(lambda c: c != 0x22))
                for _ in range(t.width)
            )
        is_meta = not t.is_bytes and draw(st.booleans())
        header_fields.append(FieldSpec(name, t, is_meta=is_meta, expect=expect))
    repeat_idx = draw(st.integers(0, n_header - 1))
    rf = header_fields[repeat_idx]
    rf_kind = draw(st.sampled_from(["u16", "u32", "u64"]))
    header_fields[repeat_idx] = FieldSpec(rf.name, ScalarType.numeric(rf_kind),
                                          is_meta=rf.is_meta)

    event_fields = []
    key_idx = draw(st.integers(0, len(event_names) - 1))
    for i, name in enumerate(event_names):
        if i == key_idx:
            event_fields.append(FieldSpec(name, ScalarType.numeric("u64"),
                                          is_meta=True, is_timestamp_key=True))
        else:
            t = scalar()
            is_meta = not t.is_bytes and draw(st.booleans())
            event_fields.append(FieldSpec(name, t, is_meta=is_meta))

    return MddSchema(
        format_name=draw(_ident),
        endianness="little",
        header_fields=tuple(header_fields),
        event_fields=tuple(event_fields),
        repeat_ref=header_fields[repeat_idx].name,
    )


@given(schemas())
def test_round_trip_generated(schema):
    schema.validate()
    assert parse_mdd(to_text(schema)) == schema


@given(schemas(), st.integers(0, 4))
def test_expect_width_mismatch_always_rejected(schema, extra):
    target = None
    for f in schema.header_fields:
        if f.expect is not None:
            target = f
            break
    if target is None:
        return
    bad = target.expect + b"X" * (extra + 1)
    text = to_text(schema).replace(
        'expect "%s"' % target.expect.decode("ascii"),
        'expect "%s"' % bad.decode("ascii"),
    )
    with pytest.raises(InvalidExpectWidth):
        parse_mdd(text)


@given(schemas())
def test_sizes_are_field_width_sums(schema):
    assert header_size(schema) == sum(f.type.width for f in schema.header_fields)
    assert record_size(schema) == sum(f.type.width for f in schema.event_fields)
