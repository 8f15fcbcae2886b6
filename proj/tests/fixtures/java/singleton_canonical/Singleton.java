package demo;

public final class Singleton {
    private static final Singleton INSTANCE = new Singleton();

    private int hits;

    private Singleton() {
    }

    public static Singleton getInstance() {
        return INSTANCE;
    }

    public int touch() {
        hits++;
        return hits;
    }
}
