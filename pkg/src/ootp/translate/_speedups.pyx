# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled table-driven machines for the mini-language interpreters.

Arithmetic is checked 64-bit; any overflow raises OverflowError and the
caller re-runs that input on the unbounded pure interpreter.  `ImpMachine`
executes imperative block tables (assignments mutate a state array);
`ChainMachine` executes the constructor/tail-call tables that the OO and
functional compilers emit (state changes only by building a fresh tuple).
"""

from libc.stdlib cimport free, malloc
from libc.limits cimport LLONG_MAX, LLONG_MIN

cdef int E_CONST = 0, E_VAR = 1, E_ADD = 2, E_SUB = 3
cdef int I_ASSIGN = 0, I_IF = 1, I_GOTO = 2, I_STOP = 3, I_LEAF = 4

DEF MAX_STACK = 64


cdef class _Machine:
    cdef long long* expr_code
    cdef int* expr_off
    cdef int* expr_len
    cdef int n_exprs
    cdef int* cond_op
    cdef int* cond_l
    cdef int* cond_r
    cdef long long* unit_code
    cdef int* unit_off
    cdef int* unit_len
    cdef int n_units
    cdef int nvars

    def __cinit__(self, int nvars, list exprs, list conds, list units, *extra):
        cdef int i, j, total
        self.nvars = nvars
        self.n_exprs = len(exprs)
        total = 0
        for e in exprs:
            total += len(e)
        self.expr_code = <long long*> malloc(max(total, 1) * sizeof(long long))
        self.expr_off = <int*> malloc(max(self.n_exprs, 1) * sizeof(int))
        self.expr_len = <int*> malloc(max(self.n_exprs, 1) * sizeof(int))
        total = 0
        for i, e in enumerate(exprs):
            self.expr_off[i] = total
            self.expr_len[i] = len(e)
            for j in range(len(e)):
                self.expr_code[total + j] = e[j]
            total += len(e)

        cdef int ncond = len(conds)
        self.cond_op = <int*> malloc(max(ncond, 1) * sizeof(int))
        self.cond_l = <int*> malloc(max(ncond, 1) * sizeof(int))
        self.cond_r = <int*> malloc(max(ncond, 1) * sizeof(int))
        for i, (op, l, r) in enumerate(conds):
            self.cond_op[i] = op
            self.cond_l[i] = l
            self.cond_r[i] = r

        self.n_units = len(units)
        total = 0
        for u in units:
            total += len(u)
        self.unit_code = <long long*> malloc(max(total, 1) * sizeof(long long))
        self.unit_off = <int*> malloc(max(self.n_units, 1) * sizeof(int))
        self.unit_len = <int*> malloc(max(self.n_units, 1) * sizeof(int))
        total = 0
        for i, u in enumerate(units):
            self.unit_off[i] = total
            self.unit_len[i] = len(u)
            for j in range(len(u)):
                self.unit_code[total + j] = u[j]
            total += len(u)

    def __dealloc__(self):
        free(self.expr_code)
        free(self.expr_off)
        free(self.expr_len)
        free(self.cond_op)
        free(self.cond_l)
        free(self.cond_r)
        free(self.unit_code)
        free(self.unit_off)
        free(self.unit_len)

    cdef long long _eval(self, int eid, long long* state) except? LLONG_MIN:
        cdef long long stack[MAX_STACK]
        cdef long long a, b
        cdef int sp = 0
        cdef int k = self.expr_off[eid]
        cdef int end = k + self.expr_len[eid]
        cdef long long opc
        while k < end:
            opc = self.expr_code[k]
            if opc == E_CONST:
                k += 1
                stack[sp] = self.expr_code[k]
                sp += 1
            elif opc == E_VAR:
                k += 1
                stack[sp] = state[<int> self.expr_code[k]]
                sp += 1
            elif opc == E_ADD:
                b = stack[sp - 1]
                a = stack[sp - 2]
                if (b > 0 and a > LLONG_MAX - b) or (b < 0 and a < LLONG_MIN - b):
                    raise OverflowError("64-bit overflow in +")
                sp -= 1
                stack[sp - 1] = a + b
            else:
                b = stack[sp - 1]
                a = stack[sp - 2]
                if (b < 0 and a > LLONG_MAX + b) or (b > 0 and a < LLONG_MIN + b):
                    raise OverflowError("64-bit overflow in -")
                sp -= 1
                stack[sp - 1] = a - b
            k += 1
        return stack[0]

    cdef bint _test(self, int cid, long long* state) except? -1:
        cdef long long a = self._eval(self.cond_l[cid], state)
        cdef long long b = self._eval(self.cond_r[cid], state)
        cdef int op = self.cond_op[cid]
        if op == 0:
            return a < b
        if op == 1:
            return a > b
        if op == 2:
            return a == b
        if op == 3:
            return a <= b
        return a >= b


cdef class ImpMachine(_Machine):
    """Runs imperative block tables: assignments mutate the state array."""

    def run(self, int entry, list init, long long fuel):
        cdef long long* state = <long long*> malloc(self.nvars * sizeof(long long))
        if state == NULL:
            raise MemoryError()
        cdef int i, ip, base, unit
        cdef long long steps = 0
        cdef long long opc
        cdef int status = 1
        try:
            for i in range(self.nvars):
                state[i] = init[i]
            unit = entry
            while True:
                if steps >= fuel:
                    status = 1
                    return (status, None, fuel)
                steps += 1
                base = self.unit_off[unit]
                ip = base
                while True:
                    opc = self.unit_code[ip]
                    if opc == I_ASSIGN:
                        state[<int> self.unit_code[ip + 1]] = self._eval(<int> self.unit_code[ip + 2], state)
                        ip += 3
                    elif opc == I_IF:
                        if self._test(<int> self.unit_code[ip + 1], state):
                            ip += 3
                        else:
                            ip = base + <int> self.unit_code[ip + 2]
                    elif opc == I_GOTO:
                        unit = <int> self.unit_code[ip + 1]
                        break
                    else:  # I_STOP
                        return (0, [state[i] for i in range(self.nvars)], steps)
        finally:
            free(state)


cdef class ChainMachine(_Machine):
    """Runs constructor/tail-call tables (the OO and functional forms)."""

    cdef long long* leaf_args
    cdef int n_leaf_args

    def __cinit__(self, int nvars, list exprs, list conds, list units, list leaf_args):
        cdef int i
        self.n_leaf_args = len(leaf_args)
        self.leaf_args = <long long*> malloc(max(self.n_leaf_args, 1) * sizeof(long long))
        for i in range(self.n_leaf_args):
            self.leaf_args[i] = leaf_args[i]

    def __dealloc__(self):
        free(self.leaf_args)

    def run(self, int entry, list init, long long fuel):
        cdef long long* state = <long long*> malloc(self.nvars * sizeof(long long))
        cdef long long* fresh = <long long*> malloc(self.nvars * sizeof(long long))
        if state == NULL or fresh == NULL:
            free(state)
            free(fresh)
            raise MemoryError()
        cdef int i, ip, base, unit, call, argbase, new_flag
        cdef long long steps = 0
        cdef long long opc
        cdef long long* tmp
        try:
            for i in range(self.nvars):
                state[i] = init[i]
            unit = entry
            while True:
                if steps >= fuel:
                    return (1, None, fuel)
                steps += 1
                base = self.unit_off[unit]
                ip = base
                while True:
                    opc = self.unit_code[ip]
                    if opc == I_IF:
                        if self._test(<int> self.unit_code[ip + 1], state):
                            ip += 3
                        else:
                            ip = base + <int> self.unit_code[ip + 2]
                    else:  # I_LEAF
                        new_flag = <int> self.unit_code[ip + 1]
                        call = <int> self.unit_code[ip + 2]
                        argbase = <int> self.unit_code[ip + 3]
                        if new_flag:
                            for i in range(self.nvars):
                                fresh[i] = self._eval(<int> self.leaf_args[argbase + i], state)
                            tmp = state
                            state = fresh
                            fresh = tmp
                        if call < 0:
                            return (0, [state[i] for i in range(self.nvars)], steps)
                        unit = call
                        break
        finally:
            free(state)
            free(fresh)
