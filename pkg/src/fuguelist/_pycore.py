"""Pure-Python tree storage kernel.

Nodes are integer handles; handle 0 is the root. Two structures share the
handles:

* the Fugue tree itself: parent, side, right origin and singly linked,
  ordered child lists (``lhead``/``rhead`` heads, ``nsib`` next-sibling);
* an implicit treap over the tombstone-inclusive traversal order, carrying
  subtree sizes and visible counts. It answers position and index queries in
  O(log n) without walking the (possibly very deep) Fugue tree.

Handle 0 doubles as the null link in both structures: the root is never a
child and never appears in the treap.

``_ccore.pyx`` is a line-for-line port; keep the two in step.
"""

from array import array

NONE = -1
END = -2

_MASK = 0xFFFFFFFF


def _priority(h):
    # deterministic 32-bit mix so trees (and timings) are reproducible
    x = (h * 0x9E3779B1) & _MASK
    x ^= x >> 16
    x = (x * 0x85EBCA6B) & _MASK
    x ^= x >> 13
    x = (x * 0xC2B2AE35) & _MASK
    x ^= x >> 16
    return x


class TreeCore:
    def __init__(self):
        # Fugue tree
        self._par = array("i", [0])
        self._side = array("b", [0])
        self._ro = array("i", [NONE])
        self._lhead = array("i", [0])
        self._rhead = array("i", [0])
        self._nsib = array("i", [0])
        # treap
        self._tl = array("i", [0])
        self._tr = array("i", [0])
        self._tp = array("i", [0])
        self._cnt = array("i", [0])
        self._vcnt = array("i", [0])
        self._vis = array("b", [0])
        self._pri = array("I", [0])
        self._troot = 0

    # -- sizes -------------------------------------------------------------

    def __len__(self):
        return len(self._par) - 1

    @property
    def visible_count(self):
        return self._vcnt[self._troot]

    def is_visible(self, h):
        return bool(self._vis[h])

    # -- Fugue tree accessors ---------------------------------------------

    def parent(self, h):
        return self._par[h]

    def side(self, h):
        return self._side[h]

    def right_origin(self, h):
        return self._ro[h]

    def set_right_origin(self, h, ro):
        self._ro[h] = ro

    def has_children(self, h, side):
        return (self._rhead[h] if side else self._lhead[h]) != 0

    def children(self, h, side):
        out = []
        c = self._rhead[h] if side else self._lhead[h]
        nsib = self._nsib
        while c:
            out.append(c)
            c = nsib[c]
        return out

    def _first_in_subtree(self, h):
        lhead = self._lhead
        while lhead[h]:
            h = lhead[h]
        return h

    def _last_in_subtree(self, h):
        rhead = self._rhead
        nsib = self._nsib
        while True:
            c = rhead[h]
            if not c:
                return h
            while nsib[c]:
                c = nsib[c]
            h = c

    # -- mutation ----------------------------------------------------------

    def add_child(self, parent, side, before=NONE, right_origin=NONE):
        """Create a node as a child of ``parent`` and return its handle.

        ``before`` names the same-side sibling the new node precedes, or
        ``NONE`` to append after every existing sibling.
        """
        if before > 0 and (self._par[before] != parent or self._side[before] != side):
            raise ValueError("before is not a sibling on this side")
        h = len(self._par)
        self._par.append(parent)
        self._side.append(side)
        self._ro.append(right_origin)
        self._lhead.append(0)
        self._rhead.append(0)
        self._nsib.append(0)
        self._tl.append(0)
        self._tr.append(0)
        self._tp.append(0)
        self._cnt.append(1)
        self._vcnt.append(1)
        self._vis.append(1)
        self._pri.append(_priority(h))

        if before > 0:
            self._treap_before(h, self._first_in_subtree(before))
        elif side == 0:
            if parent:
                self._treap_before(h, parent)
            elif self._rhead[0]:
                self._treap_before(h, self._first_in_subtree(self._rhead[0]))
            else:
                self._treap_after(h, 0)
        else:
            if parent == 0 and not self._rhead[0]:
                self._treap_after(h, 0)
            else:
                self._treap_after(h, self._last_in_subtree(parent))

        head = self._rhead if side else self._lhead
        nsib = self._nsib
        if before > 0:
            if head[parent] == before:
                nsib[h] = before
                head[parent] = h
            else:
                c = head[parent]
                while nsib[c] != before:
                    c = nsib[c]
                nsib[h] = before
                nsib[c] = h
        else:
            c = head[parent]
            if not c:
                head[parent] = h
            else:
                while nsib[c]:
                    c = nsib[c]
                nsib[c] = h
        return h

    def insert_at(self, i, tag_right_origin=False):
        """Local insertion of a new element at visible index ``i``.

        The new node becomes the right child of the element before the gap
        when that element has no right children, otherwise the left child of
        the element after it (which then has no left children). Either way the
        node is its parent's only child on that side, so no sibling ordering
        is needed. Returns the new handle.
        """
        if not 0 <= i <= self._vcnt[self._troot]:
            raise IndexError(f"insert index {i} out of range for {self._vcnt[self._troot]} visible elements")
        left = self.visible_at(i - 1) if i else 0
        nxt = self.next(left)
        if not self._rhead[left]:
            ro = (END if nxt == NONE else nxt) if tag_right_origin else NONE
            return self.add_child(left, 1, NONE, ro)
        return self.add_child(nxt, 0, NONE, NONE)

    def delete_at(self, i):
        h = self.visible_at(i)
        self.hide(h)
        return h

    def attach(self, parent, side, right_origin=NONE, visible=True):
        """Append a node to the end of ``parent``'s child list without
        indexing it. Call :meth:`reindex` once all nodes are attached."""
        h = len(self._par)
        self._par.append(parent)
        self._side.append(side)
        self._ro.append(right_origin)
        self._lhead.append(0)
        self._rhead.append(0)
        self._nsib.append(0)
        self._tl.append(0)
        self._tr.append(0)
        self._tp.append(0)
        self._cnt.append(1)
        self._vcnt.append(1 if visible else 0)
        self._vis.append(1 if visible else 0)
        self._pri.append(_priority(h))
        head = self._rhead if side else self._lhead
        c = head[parent]
        if not c:
            head[parent] = h
        else:
            nsib = self._nsib
            while nsib[c]:
                c = nsib[c]
            nsib[c] = h
        return h

    def reindex(self):
        """Rebuild the order index from the child lists in linear time."""
        tl, tr, tp, cnt, vcnt, vis, pri = (
            self._tl, self._tr, self._tp, self._cnt, self._vcnt, self._vis, self._pri)
        for h in range(len(self._par)):
            tl[h] = tr[h] = tp[h] = 0
        # Cartesian-tree construction over the in-order sequence; the result
        # is exactly the treap that incremental insertion would produce.
        spine = []
        for h in self._walk():
            last = 0
            while spine and pri[spine[-1]] < pri[h]:
                last = spine.pop()
            if last:
                tl[h] = last
                tp[last] = h
            if spine:
                tr[spine[-1]] = h
                tp[h] = spine[-1]
            spine.append(h)
        self._troot = spine[0] if spine else 0
        # reversed pre-order visits children before parents
        stack = [self._troot] if self._troot else []
        post = []
        while stack:
            h = stack.pop()
            post.append(h)
            if tl[h]:
                stack.append(tl[h])
            if tr[h]:
                stack.append(tr[h])
        for h in reversed(post):
            cnt[h] = cnt[tl[h]] + cnt[tr[h]] + 1
            vcnt[h] = vcnt[tl[h]] + vcnt[tr[h]] + vis[h]

    def _walk(self):
        """In-order walk of the Fugue tree over the child lists."""
        lhead, rhead, nsib = self._lhead, self._rhead, self._nsib
        out = []
        stack = [(0, False)]
        while stack:
            h, expanded = stack.pop()
            if expanded:
                if h:
                    out.append(h)
                continue
            right = []
            c = rhead[h]
            while c:
                right.append(c)
                c = nsib[c]
            for c in reversed(right):
                stack.append((c, False))
            stack.append((h, True))
            left = []
            c = lhead[h]
            while c:
                left.append(c)
                c = nsib[c]
            for c in reversed(left):
                stack.append((c, False))
        return out

    def hide(self, h):
        if h == 0 or not self._vis[h]:
            return False
        self._vis[h] = 0
        vcnt = self._vcnt
        tp = self._tp
        while h:
            vcnt[h] -= 1
            h = tp[h]
        return True

    # -- treap internals ---------------------------------------------------

    def _treap_after(self, h, y):
        """Link ``h`` as in-order successor of ``y`` (``y == 0``: at the end)."""
        tl, tr = self._tl, self._tr
        if y == 0:
            if not self._troot:
                self._troot = h
                return
            x = self._troot
            while tr[x]:
                x = tr[x]
            tr[x] = h
        elif not tr[y]:
            x = y
            tr[y] = h
        else:
            x = tr[y]
            while tl[x]:
                x = tl[x]
            tl[x] = h
        self._tp[h] = x
        self._fix_up(h)

    def _treap_before(self, h, y):
        tl, tr = self._tl, self._tr
        if not tl[y]:
            x = y
            tl[y] = h
        else:
            x = tl[y]
            while tr[x]:
                x = tr[x]
            tr[x] = h
        self._tp[h] = x
        self._fix_up(h)

    def _fix_up(self, h):
        tp, cnt, vcnt = self._tp, self._cnt, self._vcnt
        x = tp[h]
        while x:
            cnt[x] += 1
            vcnt[x] += 1
            x = tp[x]
        pri = self._pri
        while tp[h] and pri[h] > pri[tp[h]]:
            self._rotate_up(h)

    def _rotate_up(self, n):
        tl, tr, tp = self._tl, self._tr, self._tp
        cnt, vcnt, vis = self._cnt, self._vcnt, self._vis
        p = tp[n]
        g = tp[p]
        if tl[p] == n:
            b = tr[n]
            tl[p] = b
            tr[n] = p
        else:
            b = tl[n]
            tr[p] = b
            tl[n] = p
        if b:
            tp[b] = p
        tp[p] = n
        tp[n] = g
        if not g:
            self._troot = n
        elif tl[g] == p:
            tl[g] = n
        else:
            tr[g] = n
        cnt[p] = cnt[tl[p]] + cnt[tr[p]] + 1
        vcnt[p] = vcnt[tl[p]] + vcnt[tr[p]] + vis[p]
        cnt[n] = cnt[tl[n]] + cnt[tr[n]] + 1
        vcnt[n] = vcnt[tl[n]] + vcnt[tr[n]] + vis[n]

    # -- order queries -----------------------------------------------------

    def position(self, h):
        """Index of ``h`` in the tombstone-inclusive traversal (root: -1)."""
        if h == 0:
            return -1
        tl, tr, tp, cnt = self._tl, self._tr, self._tp, self._cnt
        r = cnt[tl[h]]
        while tp[h]:
            p = tp[h]
            if tr[p] == h:
                r += cnt[tl[p]] + 1
            h = p
        return r

    def visible_rank(self, h):
        """Number of visible nodes strictly before ``h``."""
        if h == 0:
            return 0
        tl, tr, tp, vcnt, vis = self._tl, self._tr, self._tp, self._vcnt, self._vis
        r = vcnt[tl[h]]
        while tp[h]:
            p = tp[h]
            if tr[p] == h:
                r += vcnt[tl[p]] + vis[p]
            h = p
        return r

    def at(self, pos):
        if not 0 <= pos < self._cnt[self._troot]:
            raise IndexError(f"position {pos} out of range")
        tl, tr, cnt = self._tl, self._tr, self._cnt
        x = self._troot
        while True:
            lc = cnt[tl[x]]
            if pos < lc:
                x = tl[x]
            elif pos == lc:
                return x
            else:
                pos -= lc + 1
                x = tr[x]

    def visible_at(self, i):
        if not 0 <= i < self._vcnt[self._troot]:
            raise IndexError(f"index {i} out of range for {self._vcnt[self._troot]} visible elements")
        tl, tr, vcnt, vis = self._tl, self._tr, self._vcnt, self._vis
        x = self._troot
        while True:
            lc = vcnt[tl[x]]
            if i < lc:
                x = tl[x]
            elif i == lc and vis[x]:
                return x
            else:
                i -= lc + vis[x]
                x = tr[x]

    def next(self, h):
        """Successor in the tombstone-inclusive traversal, ``NONE`` past the end."""
        tl, tr, tp = self._tl, self._tr, self._tp
        if h == 0:
            x = self._troot
            if not x:
                return NONE
        elif tr[h]:
            x = tr[h]
        else:
            while tp[h] and tr[tp[h]] == h:
                h = tp[h]
            return tp[h] or NONE
        while tl[x]:
            x = tl[x]
        return x

    def order(self, visible_only=False):
        """Handles in traversal order."""
        out = []
        tl, tr, vis = self._tl, self._tr, self._vis
        stack = []
        x = self._troot
        while stack or x:
            while x:
                stack.append(x)
                x = tl[x]
            x = stack.pop()
            if not visible_only or vis[x]:
                out.append(x)
            x = tr[x]
        return out

    def memory_bytes(self):
        return sum(a.itemsize * len(a) for a in self.__dict__.values() if isinstance(a, array))

    def copy(self):
        other = TreeCore.__new__(TreeCore)
        for name, value in self.__dict__.items():
            setattr(other, name, value[:] if isinstance(value, array) else value)
        return other
