"""Transponder model: memory images, layouts, codecs, signing, accounts."""

from campus.tag.image import TagImage, TagUid, load_timg, dump_timg
from campus.tag.codecs import Encoding
from campus.tag.layout import (
    ALL_DAY,
    CARD_V1,
    NO_ACCESS,
    FieldSpec,
    HolderType,
    Layout,
    Schedule,
    decode_field,
    define_layout,
    encode_field,
    format_layout_file,
    parse_layout_file,
    quarter_of,
    schedule_allows,
)
from campus.tag.signing import sign_card, verify_card
from campus.tag.accounts import apply_transaction
from campus.tag.reader import ReaderFieldModel

__all__ = [
    "TagImage",
    "TagUid",
    "Encoding",
    "FieldSpec",
    "Layout",
    "Schedule",
    "HolderType",
    "CARD_V1",
    "ALL_DAY",
    "NO_ACCESS",
    "define_layout",
    "encode_field",
    "decode_field",
    "quarter_of",
    "schedule_allows",
    "parse_layout_file",
    "format_layout_file",
    "sign_card",
    "verify_card",
    "apply_transaction",
    "ReaderFieldModel",
    "load_timg",
    "dump_timg",
]
