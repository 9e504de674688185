"""On-card account transactions (cafeteria, copy services, ...).

Balances live on the card, in MONEY-CENTS fields. Re-signing the image
after a transaction is the caller's duty; a gate or the coordinator does
it as part of its write path.
"""

from campus.errors import InsufficientFunds, NotAnAccount, ValueOverflow
from campus.tag.codecs import Encoding
from campus.tag.layout import Layout, decode_field, encode_field
from campus.tag.image import TagImage

_U32_MAX = (1 << 32) - 1


def apply_transaction(
    layout: Layout, image: TagImage, account_field: str, delta_cents: int
) -> TagImage:
    """Apply a signed cent delta to an account field, rejecting overdrafts."""
    spec = layout.field(account_field)
    if spec.encoding is not Encoding.MONEY_CENTS:
        raise NotAnAccount(account_field)
    balance = decode_field(layout, image, account_field)
    new_balance = balance + delta_cents
    if new_balance < 0:
        raise InsufficientFunds(
            f"balance {balance} cents cannot absorb {delta_cents}"
        )
    if new_balance > _U32_MAX:
        raise ValueOverflow(f"balance {new_balance} exceeds the 4-byte account width")
    return encode_field(layout, image, account_field, new_balance)
