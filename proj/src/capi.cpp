// pending
extern "C" { int pclab_pending_(void); int pclab_pending_(void){return 0;} }
