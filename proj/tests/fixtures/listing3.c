/* FIXME: this code assumes that sigmask is an even multiple of the size of a long integer. */

unsigned long *src = (unsigned long const *) set;
unsigned long *dest = (unsigned long *) &(thread.p->sigmask);

switch (how)
{
    case SIG_BLOCK:
    for (i = 0; i < (sizeof (sigset_t) / sizeof (unsigned long)); i++)
    {
      /* OR the bit field longword-wise. */
      *dest++ |= *src++;
    }
    break;
    case SIG_UNBLOCK:
    for (i = 0; i < (sizeof (sigset_t) / sizeof (unsigned long)); i++)
    {
      /* XOR the bitfield longword-wise. */
      *dest++ ^= *src++;
    }
    case SIG_SETMASK:
    /* Replace the whole sigmask. */
    memcpy (&(thread.p->sigmask), set, sizeof (sigset_t));
    break;
}
