// Callers are encouraged to use the setters provided which take care of setting |options| as desired.
static void set_defaults(struct opts *options)
{
    options->initialized = 1;
}
