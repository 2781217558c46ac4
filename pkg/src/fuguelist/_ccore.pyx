# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree storage kernel; mirrors ``_pycore`` operation for operation."""

from cpython.mem cimport PyMem_Realloc, PyMem_Free
from libc.string cimport memcpy
from libc.stdint cimport uint32_t

cdef enum:
    NONE = -1
    END = -2


cdef inline uint32_t _priority(uint32_t h) nogil:
    cdef uint32_t x = h * 0x9E3779B1u
    x ^= x >> 16
    x *= 0x85EBCA6Bu
    x ^= x >> 13
    x *= 0xC2B2AE35u
    x ^= x >> 16
    return x


cdef class TreeCore:
    cdef int *_par
    cdef int *_ro
    cdef int *_lhead
    cdef int *_rhead
    cdef int *_nsib
    cdef int *_tl
    cdef int *_tr
    cdef int *_tp
    cdef int *_cnt
    cdef int *_vcnt
    cdef signed char *_side
    cdef signed char *_vis
    cdef int _n
    cdef int _cap
    cdef int _troot

    def __cinit__(self):
        self._n = 0
        self._cap = 0
        self._troot = 0
        self._grow(1024)
        self._new_slot(0, 0, NONE, 0)
        self._cnt[0] = 0

    def __dealloc__(self):
        PyMem_Free(self._par)
        PyMem_Free(self._ro)
        PyMem_Free(self._lhead)
        PyMem_Free(self._rhead)
        PyMem_Free(self._nsib)
        PyMem_Free(self._tl)
        PyMem_Free(self._tr)
        PyMem_Free(self._tp)
        PyMem_Free(self._cnt)
        PyMem_Free(self._vcnt)
        PyMem_Free(self._side)
        PyMem_Free(self._vis)

    cdef void _grow(self, int cap) except *:
        cdef size_t wi = cap * sizeof(int)
        cdef size_t wb = cap * sizeof(signed char)
        cdef void *p
        p = PyMem_Realloc(self._par, wi)
        if p == NULL: raise MemoryError()
        self._par = <int *>p
        p = PyMem_Realloc(self._ro, wi)
        if p == NULL: raise MemoryError()
        self._ro = <int *>p
        p = PyMem_Realloc(self._lhead, wi)
        if p == NULL: raise MemoryError()
        self._lhead = <int *>p
        p = PyMem_Realloc(self._rhead, wi)
        if p == NULL: raise MemoryError()
        self._rhead = <int *>p
        p = PyMem_Realloc(self._nsib, wi)
        if p == NULL: raise MemoryError()
        self._nsib = <int *>p
        p = PyMem_Realloc(self._tl, wi)
        if p == NULL: raise MemoryError()
        self._tl = <int *>p
        p = PyMem_Realloc(self._tr, wi)
        if p == NULL: raise MemoryError()
        self._tr = <int *>p
        p = PyMem_Realloc(self._tp, wi)
        if p == NULL: raise MemoryError()
        self._tp = <int *>p
        p = PyMem_Realloc(self._cnt, wi)
        if p == NULL: raise MemoryError()
        self._cnt = <int *>p
        p = PyMem_Realloc(self._vcnt, wi)
        if p == NULL: raise MemoryError()
        self._vcnt = <int *>p
        p = PyMem_Realloc(self._side, wb)
        if p == NULL: raise MemoryError()
        self._side = <signed char *>p
        p = PyMem_Realloc(self._vis, wb)
        if p == NULL: raise MemoryError()
        self._vis = <signed char *>p
        self._cap = cap

    cdef int _new_slot(self, int parent, int side, int ro, int visible) except -1:
        cdef int h = self._n
        if h == 0x7FFFFFFF:
            raise OverflowError("tree is full")
        if h >= self._cap:
            self._grow(self._cap * 2 if self._cap < 0x40000000 else 0x7FFFFFFF)
        self._par[h] = parent
        self._side[h] = side
        self._ro[h] = ro
        self._lhead[h] = 0
        self._rhead[h] = 0
        self._nsib[h] = 0
        self._tl[h] = 0
        self._tr[h] = 0
        self._tp[h] = 0
        self._cnt[h] = 1
        self._vcnt[h] = visible
        self._vis[h] = visible
        self._n = h + 1
        return h

    # -- sizes -------------------------------------------------------------

    def __len__(self):
        return self._n - 1

    @property
    def visible_count(self):
        return self._vcnt[self._troot]

    cdef inline int _check(self, int h) except -1:
        if h < 0 or h >= self._n:
            raise IndexError(f"handle {h} out of range")
        return 0

    def is_visible(self, int h):
        self._check(h)
        return self._vis[h] != 0

    # -- Fugue tree accessors ---------------------------------------------

    def parent(self, int h):
        self._check(h)
        return self._par[h]

    def side(self, int h):
        self._check(h)
        return self._side[h]

    def right_origin(self, int h):
        self._check(h)
        return self._ro[h]

    def set_right_origin(self, int h, int ro):
        self._check(h)
        self._ro[h] = ro

    def has_children(self, int h, int side):
        self._check(h)
        return (self._rhead[h] if side else self._lhead[h]) != 0

    def children(self, int h, int side):
        self._check(h)
        cdef list out = []
        cdef int c = self._rhead[h] if side else self._lhead[h]
        while c:
            out.append(c)
            c = self._nsib[c]
        return out

    cdef inline int _first_in_subtree(self, int h) nogil:
        while self._lhead[h]:
            h = self._lhead[h]
        return h

    cdef inline int _last_in_subtree(self, int h) nogil:
        cdef int c
        while True:
            c = self._rhead[h]
            if not c:
                return h
            while self._nsib[c]:
                c = self._nsib[c]
            h = c

    # -- mutation ----------------------------------------------------------

    def add_child(self, int parent, int side, int before=NONE, int right_origin=NONE):
        self._check(parent)
        if before > 0:
            self._check(before)
            if self._par[before] != parent or self._side[before] != side:
                raise ValueError("before is not a sibling on this side")
        return self._add_child(parent, side, before, right_origin)

    cdef int _add_child(self, int parent, int side, int before, int right_origin) except -1:
        cdef int h = self._new_slot(parent, side, right_origin, 1)
        cdef int c
        cdef int *head
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
        if before > 0:
            if head[parent] == before:
                self._nsib[h] = before
                head[parent] = h
            else:
                c = head[parent]
                while self._nsib[c] != before:
                    c = self._nsib[c]
                self._nsib[h] = before
                self._nsib[c] = h
        else:
            c = head[parent]
            if not c:
                head[parent] = h
            else:
                while self._nsib[c]:
                    c = self._nsib[c]
                self._nsib[c] = h
        return h

    def insert_at(self, int i, bint tag_right_origin=False):
        cdef int total = self._vcnt[self._troot]
        cdef int left, nxt, ro
        if i < 0 or i > total:
            raise IndexError(f"insert index {i} out of range for {total} visible elements")
        left = self._visible_at(i - 1) if i else 0
        nxt = self._next(left)
        if not self._rhead[left]:
            ro = NONE
            if tag_right_origin:
                ro = END if nxt == NONE else nxt
            return self._add_child(left, 1, NONE, ro)
        return self._add_child(nxt, 0, NONE, NONE)

    def delete_at(self, int i):
        cdef int total = self._vcnt[self._troot]
        if i < 0 or i >= total:
            raise IndexError(f"index {i} out of range for {total} visible elements")
        cdef int h = self._visible_at(i)
        self._hide(h)
        return h

    def attach(self, int parent, int side, int right_origin=NONE, bint visible=True):
        self._check(parent)
        cdef int h = self._new_slot(parent, side, right_origin, 1 if visible else 0)
        cdef int *head = self._rhead if side else self._lhead
        cdef int c = head[parent]
        if not c:
            head[parent] = h
        else:
            while self._nsib[c]:
                c = self._nsib[c]
            self._nsib[c] = h
        return h

    def reindex(self):
        cdef int n = self._n
        cdef int h, c, last, sp, k
        cdef int *order
        cdef int *stack
        cdef int *spine
        cdef int count = 0
        cdef uint32_t ph
        for h in range(n):
            self._tl[h] = 0
            self._tr[h] = 0
            self._tp[h] = 0
        order = <int *>PyMem_Realloc(NULL, n * sizeof(int))
        stack = <int *>PyMem_Realloc(NULL, 2 * n * sizeof(int))
        if order == NULL or stack == NULL:
            PyMem_Free(order)
            PyMem_Free(stack)
            raise MemoryError()
        try:
            # in-order walk; stack entries encode (node, expanded) as 2h / 2h+1
            sp = 0
            stack[sp] = 0
            sp += 1
            while sp:
                sp -= 1
                k = stack[sp]
                h = k >> 1
                if k & 1:
                    if h:
                        order[count] = h
                        count += 1
                    continue
                # reserve slots, then fill so the first child ends on top
                c = self._rhead[h]
                while c:
                    sp += 1
                    c = self._nsib[c]
                c = self._rhead[h]
                k = sp - 1
                while c:
                    stack[k] = c << 1
                    k -= 1
                    c = self._nsib[c]
                stack[sp] = (h << 1) | 1
                sp += 1
                c = self._lhead[h]
                while c:
                    sp += 1
                    c = self._nsib[c]
                c = self._lhead[h]
                k = sp - 1
                while c:
                    stack[k] = c << 1
                    k -= 1
                    c = self._nsib[c]

            # Cartesian-tree build, reusing the stack buffer as the spine
            spine = stack
            sp = 0
            for k in range(count):
                h = order[k]
                ph = _priority(h)
                last = 0
                while sp and _priority(spine[sp - 1]) < ph:
                    sp -= 1
                    last = spine[sp]
                if last:
                    self._tl[h] = last
                    self._tp[last] = h
                if sp:
                    self._tr[spine[sp - 1]] = h
                    self._tp[h] = spine[sp - 1]
                spine[sp] = h
                sp += 1
            self._troot = spine[0] if sp else 0

            # sizes: reversed pre-order puts children before parents
            count = 0
            sp = 0
            if self._troot:
                stack[sp] = self._troot
                sp += 1
            while sp:
                sp -= 1
                h = stack[sp]
                order[count] = h
                count += 1
                if self._tl[h]:
                    stack[sp] = self._tl[h]
                    sp += 1
                if self._tr[h]:
                    stack[sp] = self._tr[h]
                    sp += 1
            for k in range(count - 1, -1, -1):
                h = order[k]
                self._cnt[h] = self._cnt[self._tl[h]] + self._cnt[self._tr[h]] + 1
                self._vcnt[h] = self._vcnt[self._tl[h]] + self._vcnt[self._tr[h]] + self._vis[h]
        finally:
            PyMem_Free(order)
            PyMem_Free(stack)

    def hide(self, int h):
        self._check(h)
        if h == 0:
            return False
        return self._hide(h)

    cdef bint _hide(self, int h):
        if not self._vis[h]:
            return False
        self._vis[h] = 0
        while h:
            self._vcnt[h] -= 1
            h = self._tp[h]
        return True

    # -- treap internals ---------------------------------------------------

    cdef void _treap_after(self, int h, int y):
        cdef int x
        if y == 0:
            if not self._troot:
                self._troot = h
                return
            x = self._troot
            while self._tr[x]:
                x = self._tr[x]
            self._tr[x] = h
        elif not self._tr[y]:
            x = y
            self._tr[y] = h
        else:
            x = self._tr[y]
            while self._tl[x]:
                x = self._tl[x]
            self._tl[x] = h
        self._tp[h] = x
        self._fix_up(h)

    cdef void _treap_before(self, int h, int y):
        cdef int x
        if not self._tl[y]:
            x = y
            self._tl[y] = h
        else:
            x = self._tl[y]
            while self._tr[x]:
                x = self._tr[x]
            self._tr[x] = h
        self._tp[h] = x
        self._fix_up(h)

    cdef void _fix_up(self, int h):
        cdef int x = self._tp[h]
        cdef uint32_t ph = _priority(h)
        while x:
            self._cnt[x] += 1
            self._vcnt[x] += 1
            x = self._tp[x]
        while self._tp[h] and ph > _priority(self._tp[h]):
            self._rotate_up(h)

    cdef void _rotate_up(self, int n):
        cdef int *tl = self._tl
        cdef int *tr = self._tr
        cdef int *tp = self._tp
        cdef int p = tp[n]
        cdef int g = tp[p]
        cdef int b
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
        self._cnt[p] = self._cnt[tl[p]] + self._cnt[tr[p]] + 1
        self._vcnt[p] = self._vcnt[tl[p]] + self._vcnt[tr[p]] + self._vis[p]
        self._cnt[n] = self._cnt[tl[n]] + self._cnt[tr[n]] + 1
        self._vcnt[n] = self._vcnt[tl[n]] + self._vcnt[tr[n]] + self._vis[n]

    # -- order queries -----------------------------------------------------

    def position(self, int h):
        self._check(h)
        if h == 0:
            return -1
        cdef int r = self._cnt[self._tl[h]]
        cdef int p
        while self._tp[h]:
            p = self._tp[h]
            if self._tr[p] == h:
                r += self._cnt[self._tl[p]] + 1
            h = p
        return r

    def visible_rank(self, int h):
        self._check(h)
        if h == 0:
            return 0
        cdef int r = self._vcnt[self._tl[h]]
        cdef int p
        while self._tp[h]:
            p = self._tp[h]
            if self._tr[p] == h:
                r += self._vcnt[self._tl[p]] + self._vis[p]
            h = p
        return r

    def at(self, int pos):
        if pos < 0 or pos >= self._cnt[self._troot]:
            raise IndexError(f"position {pos} out of range")
        cdef int x = self._troot
        cdef int lc
        while True:
            lc = self._cnt[self._tl[x]]
            if pos < lc:
                x = self._tl[x]
            elif pos == lc:
                return x
            else:
                pos -= lc + 1
                x = self._tr[x]

    def visible_at(self, int i):
        cdef int total = self._vcnt[self._troot]
        if i < 0 or i >= total:
            raise IndexError(f"index {i} out of range for {total} visible elements")
        return self._visible_at(i)

    cdef int _visible_at(self, int i) nogil:
        cdef int x = self._troot
        cdef int lc
        while True:
            lc = self._vcnt[self._tl[x]]
            if i < lc:
                x = self._tl[x]
            elif i == lc and self._vis[x]:
                return x
            else:
                i -= lc + self._vis[x]
                x = self._tr[x]

    def next(self, int h):
        self._check(h)
        return self._next(h)

    cdef int _next(self, int h) nogil:
        cdef int x
        if h == 0:
            x = self._troot
            if not x:
                return NONE
        elif self._tr[h]:
            x = self._tr[h]
        else:
            while self._tp[h] and self._tr[self._tp[h]] == h:
                h = self._tp[h]
            return self._tp[h] if self._tp[h] else NONE
        while self._tl[x]:
            x = self._tl[x]
        return x

    def order(self, bint visible_only=False):
        cdef list out = []
        cdef list stack = []
        cdef int x = self._troot
        while stack or x:
            while x:
                stack.append(x)
                x = self._tl[x]
            x = stack.pop()
            if not visible_only or self._vis[x]:
                out.append(x)
            x = self._tr[x]
        return out

    def memory_bytes(self):
        return self._cap * (10 * sizeof(int) + 2 * sizeof(signed char))

    def copy(self):
        cdef TreeCore other = TreeCore.__new__(TreeCore)
        cdef size_t wi, wb
        other._grow(self._cap)
        wi = self._n * sizeof(int)
        wb = self._n * sizeof(signed char)
        memcpy(other._par, self._par, wi)
        memcpy(other._ro, self._ro, wi)
        memcpy(other._lhead, self._lhead, wi)
        memcpy(other._rhead, self._rhead, wi)
        memcpy(other._nsib, self._nsib, wi)
        memcpy(other._tl, self._tl, wi)
        memcpy(other._tr, self._tr, wi)
        memcpy(other._tp, self._tp, wi)
        memcpy(other._cnt, self._cnt, wi)
        memcpy(other._vcnt, self._vcnt, wi)
        memcpy(other._side, self._side, wb)
        memcpy(other._vis, self._vis, wb)
        other._n = self._n
        other._troot = self._troot
        return other
