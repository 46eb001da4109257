"""Protocol instances attached to atomic cells."""

from __future__ import annotations

from dataclasses import dataclass

from ..frontend import ast as A
from ..frontend.resolve import SYNC_ROLE
from ..symheap import terms as T
from ..symheap.translate import THIS, Translator


@dataclass(frozen=True)
class ProtocolInstance:
    cell: str
    roles: tuple  # participant roles, without S
    inv: str
    share: str
    trans: str
    bound: object  # Expr or None

    @staticmethod
    def of(cls: A.ClassDecl, cell: str) -> "ProtocolInstance":
        a = cls.atomic(cell)
        if a is None:
            raise KeyError(cell)
        return ProtocolInstance(cell, cls.role_set(a.roles), a.inv, a.share, a.trans, a.bound)

    @property
    def receiver(self) -> T.Term:
        return T.Field(THIS, self.cell)

    def share_term(self, ctx: Translator, role: T.Term, value: T.Term) -> T.Term:
        return ctx.call(self.share, [role, value])

    def trans_term(self, ctx: Translator, role: T.Term, old: T.Term, new: T.Term) -> T.Term:
        return ctx.call(self.trans, [role, old, new])

    def range_term(self, ctx: Translator, value: T.Term) -> T.Term:
        """``0 <= value <= M`` when the cell declares a state bound M."""
        if self.bound is None:
            return T.TRUE
        m = ctx.term(self.bound, {}, {})
        return T.and_(T.cmp(">=", value, T.ZERO), T.cmp("<=", value, m))

    @property
    def sync_role(self) -> T.Term:
        return T.RoleC(SYNC_ROLE)
